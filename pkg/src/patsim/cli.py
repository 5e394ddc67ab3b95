"""Command-line driver: simulate, sweep, analyze, annotate.

Exit codes: 0 success, 1 model error, 2 config/scenario error, 3 analysis error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import cli_io
from .config import OutputOptions, load_config, load_reference
from .errors import ConfigError, PatError, ValidationError
from .scenario import simulate
from .stats import sweep_fou_records, sweep_slew_rate

logger = logging.getLogger("patsim")

EXIT_OK = 0


def _load(args):
    doc = load_reference() if args.config == "reference" else load_config(args.config)
    return doc.with_seed(args.seed)


def _grid(text: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ValidationError(f"--grid must be a comma-separated list of numbers, got {text!r}") from None
    if not values:
        raise ValidationError("--grid is empty")
    return values


def cmd_simulate(args) -> int:
    doc = _load(args)
    result = simulate(doc.scenario)
    out = Path(args.out)
    cli_io.write_outputs({
        out / "delays.csv": cli_io.delays_csv(result),
        out / "summary.json": cli_io.json_text(cli_io.summary(result, doc.output)),
    })
    logger.info("wrote %d contacts to %s", len(result.records), out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    doc = _load(args)
    grid = _grid(args.grid)
    result = simulate(doc.scenario)
    if args.axis == "slew_rate":
        sweeps = sweep_slew_rate(result, grid, doc.model.sequential_axes)
    else:
        sweeps = sweep_fou_records(result, grid)
    path = Path(args.out) / f"sweep_{args.axis}.csv"
    cli_io.write_outputs({path: cli_io.sweep_csv(sweeps)})
    return EXIT_OK


def cmd_analyze(args) -> int:
    rows = cli_io.read_delays(args.input)
    out_opts = OutputOptions()
    if args.config:
        out_opts = _load(args).output
    analysis = cli_io.analyze_rows(rows, out_opts)
    path = Path(args.out) / "analysis.json"
    cli_io.write_outputs({path: cli_io.json_text(analysis)})
    return EXIT_OK


def cmd_annotate(args) -> int:
    doc = _load(args)
    try:
        text = Path(args.plan).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read plan {args.plan}: {exc.strerror or exc}") from None
    annotated = cli_io.annotate_csv(text, doc, args.plan)
    cli_io.write_outputs({Path(args.out): annotated})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="patsim",
        description="PAT delay simulator for optical space links.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument(
            "--config", required=config_required,
            help="YAML config path, or 'reference' for the bundled scenario",
        )
        p.add_argument("--seed", type=int, default=None, help="override the config seed")

    p = sub.add_parser("simulate", help="simulate a scenario and write delays.csv + summary.json")
    common(p)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="mean delay per class over a slew-rate or FOU grid")
    common(p)
    p.add_argument("--axis", required=True, choices=("slew_rate", "fou"))
    p.add_argument("--grid", required=True, help="comma-separated values (deg/s or deg)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("analyze", help="histogram / KDE / modes of a delays.csv")
    p.add_argument("--input", required=True, help="delays.csv from simulate")
    p.add_argument("--out", required=True, help="output directory")
    common(p, config_required=False)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("annotate", help="add PAT delay and effective duration to a contact plan")
    p.add_argument("--plan", required=True, help="contact plan CSV")
    common(p)
    p.add_argument("--out", required=True, help="annotated CSV path")
    p.set_defaults(func=cmd_annotate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
    )
    if args.seed is not None and args.seed < 0:
        parser.error("--seed must be non-negative")
    try:
        return args.func(args)
    except PatError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())

"""CSV/JSON emitters, delay-file analysis and contact-plan annotation."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .config import ConfigDocument, OutputOptions
from .errors import (
    DegenerateSamples,
    EmptySamples,
    MalformedRow,
    SchemaError,
    UnknownNode,
    ValidationError,
)
from .scenario import (
    Contact,
    ContactRecord,
    LinkTransitionClass,
    NodeState,
    SimulationResult,
    acquisition_class,
    contact_class,
    evaluate_contact,
    line_of_sight,
    local_frame,
    propagate,
)
from .geometry import unit
from .stats import DelayDistribution, SweepResult

DELAY_COLUMNS = (
    "contact_id", "node_a", "node_b", "start_s", "end_s", "class_a", "class_b",
    "t_pointing_s", "t_seek_s", "t_dwell_s", "t_acq_s", "t_track_s", "t_total_s",
)
SWEEP_COLUMNS = ("class", "param_value", "mean_delay_s")
PLAN_REQUIRED = ("from_id", "to_id", "start_s", "end_s")
PLAN_OPTIONAL = ("prev_target_from", "prev_target_to")
ANNOTATE_COLUMNS = ("t_pat_s", "effective_duration_s", "infeasible")
_FLOAT_DELAY_COLUMNS = DELAY_COLUMNS[3:5] + DELAY_COLUMNS[7:]


def fmt(x: float) -> str:
    """Shortest round-trip decimal form, so parsed values are bit-identical."""
    return repr(float(x))


def sig6(x: float) -> float:
    return float(f"{x:.6g}")


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def json_text(obj: Any) -> str:
    return json.dumps(_round(obj), indent=2, sort_keys=False) + "\n"


def _round(obj):
    if isinstance(obj, float):
        return sig6(obj) if math.isfinite(obj) else None
    if isinstance(obj, (np.floating,)):
        return _round(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_round(v) for v in obj]
    return obj


def write_outputs(files: dict[Path, str]) -> None:
    """Write every file only after all of them have been rendered."""
    for path, text in files.items():
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


# --------------------------------------------------------------------------
# delays.csv


def delay_rows(records: Sequence[ContactRecord]) -> list[list[str]]:
    rows = []
    for i, rec in enumerate(records):
        c, b = rec.contact, rec.breakdown
        rows.append([
            str(i), c.node_a, c.node_b, fmt(c.start), fmt(c.end),
            rec.class_a.value, rec.class_b.value,
            fmt(b.t_pointing), fmt(b.t_seek), fmt(b.t_dwell_total), fmt(b.t_acq),
            fmt(b.t_acq_to_track), fmt(b.t_total),
        ])
    return rows


def delays_csv(result: SimulationResult) -> str:
    return csv_text(DELAY_COLUMNS, delay_rows(result.records))


@dataclass(frozen=True)
class DelayRow:
    contact_id: str
    node_a: str
    node_b: str
    class_a: LinkTransitionClass
    class_b: LinkTransitionClass
    values: dict[str, float]

    @property
    def contact_class(self) -> LinkTransitionClass:
        return contact_class(self.class_a, self.class_b)

    @property
    def acq_class(self) -> str | None:
        return acquisition_class(self.class_a, self.class_b)


def read_delays(path: str | Path) -> list[DelayRow]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc.strerror or exc}") from None
    return parse_delays(text, str(path))


def parse_delays(text: str, source: str = "<delays>") -> list[DelayRow]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None:
        raise SchemaError(f"{source}: empty file, expected header {','.join(DELAY_COLUMNS)}")
    missing = [c for c in DELAY_COLUMNS if c not in header]
    extra = [c for c in header if c not in DELAY_COLUMNS]
    if missing or extra:
        parts = []
        if missing:
            parts.append(f"missing column(s) {', '.join(missing)}")
        if extra:
            parts.append(f"unexpected column(s) {', '.join(extra)}")
        raise SchemaError(f"{source}: " + "; ".join(parts))
    idx = {c: header.index(c) for c in DELAY_COLUMNS}
    rows = []
    for line, raw in enumerate(reader, start=2):
        if not raw:
            continue
        if len(raw) != len(header):
            raise SchemaError(f"{source}:{line}: expected {len(header)} fields, got {len(raw)}")
        try:
            values = {c: float(raw[idx[c]]) for c in _FLOAT_DELAY_COLUMNS}
            ca = LinkTransitionClass(raw[idx["class_a"]])
            cb = LinkTransitionClass(raw[idx["class_b"]])
        except ValueError as exc:
            raise SchemaError(f"{source}:{line}: {exc}") from None
        rows.append(DelayRow(raw[idx["contact_id"]], raw[idx["node_a"]], raw[idx["node_b"]], ca, cb, values))
    return rows


# --------------------------------------------------------------------------
# analysis


def _dist_json(d: DelayDistribution, out: OutputOptions | None = None) -> dict:
    body: dict[str, Any] = {
        "label": d.class_label,
        "n": int(d.samples.size),
        "mean_s": float(np.mean(d.samples)),
        "bins": [[b.lower, b.upper, b.count] for b in d.bins],
        "kde": None,
        "modes": [{"location_s": m.location, "density": m.density} for m in d.modes],
    }
    if d.kde is not None:
        body["kde"] = {
            "bandwidth_s": d.kde.bandwidth,
            "x_s": d.kde.x.tolist(),
            "density": d.kde.density.tolist(),
        }
    return body


def _distribution(samples, label, out: OutputOptions, strict=False) -> DelayDistribution:
    return DelayDistribution.from_samples(
        samples, label, out.bin_width_s, out.kde_bandwidth, out.min_prominence, strict=strict
    )


def analyze_rows(rows: Sequence[DelayRow], out: OutputOptions | None = None) -> dict:
    """Histogram/KDE/modes for pointing, acquisition and total delay.

    Pooled pointing leaves out first contacts, whose slew is zero by
    construction. Per-class distributions with fewer than two distinct values
    are reported without a KDE; the pooled acquisition distribution must have
    at least two rows.
    """
    out = out or OutputOptions()
    if not rows:
        raise EmptySamples("delay file has no rows")
    if len(rows) < 2:
        raise DegenerateSamples("a single contact cannot form a delay distribution")
    # order-insensitive: fix the row order before any floating-point reduction
    rows = sorted(rows, key=lambda r: (r.contact_id, r.node_a, r.node_b, r.values["start_s"]))

    by_class: dict[str, list[float]] = {}
    pooled_pointing: list[float] = []
    by_acq: dict[str, list[float]] = {}
    for r in rows:
        label = r.contact_class
        by_class.setdefault(label.value, []).append(r.values["t_pointing_s"])
        if label is not LinkTransitionClass.FIRST_CONTACT:
            pooled_pointing.append(r.values["t_pointing_s"])
        if r.acq_class:
            by_acq.setdefault(r.acq_class, []).append(r.values["t_acq_s"])

    def dist(samples, label):
        return _dist_json(_distribution(samples, label, out), out)

    result: dict[str, Any] = {
        "n_rows": len(rows),
        "settings": {
            "bin_width_s": out.bin_width_s,
            "kde_bandwidth": out.kde_bandwidth,
            "min_prominence": out.min_prominence,
        },
        "pointing": {
            "pooled": dist(pooled_pointing, "pointing") if pooled_pointing else None,
            "by_class": {k: dist(v, k) for k, v in sorted(by_class.items())},
        },
        "acquisition": {
            "pooled": dist([r.values["t_acq_s"] for r in rows], "acquisition"),
            "by_class": {k: dist(v, k) for k, v in sorted(by_acq.items())},
        },
        "total": {"pooled": dist([r.values["t_total_s"] for r in rows], "total")},
    }
    return result


def mode_locations(analysis: dict, kind: str) -> list[float]:
    pooled = analysis[kind]["pooled"]
    return [m["location_s"] for m in pooled["modes"]] if pooled else []


def summary(result: SimulationResult, out: OutputOptions | None = None) -> dict:
    out = out or OutputOptions()
    rows = parse_delays(delays_csv(result))
    classes: dict[str, dict] = {}
    for label in LinkTransitionClass:
        recs = [r for r in result.records if r.breakdown.transition_class is label]
        if not recs:
            continue
        classes[label.value] = {
            "count": len(recs),
            "mean_pointing_s": math.fsum(r.breakdown.t_pointing for r in recs) / len(recs),
            "mean_acq_s": math.fsum(r.breakdown.t_acq for r in recs) / len(recs),
            "mean_total_s": math.fsum(r.breakdown.t_total for r in recs) / len(recs),
        }
    acq: dict[str, dict] = {}
    for r in result.records:
        entry = acq.setdefault(r.acq_class, {"count": 0, "sum": 0.0})
        entry["count"] += 1
        entry["sum"] += r.breakdown.t_acq
    body = {
        "n_contacts": len(result.records),
        "seed": result.scenario.seed,
        "horizon_s": result.scenario.horizon_s,
        "time_step_s": result.scenario.time_step_s,
        "classes": classes,
        "acquisition_classes": {
            k: {"count": v["count"], "mean_acq_s": v["sum"] / v["count"]} for k, v in sorted(acq.items())
        },
        "pointing_modes_s": [],
        "acquisition_modes_s": [],
    }
    if len(rows) >= 2:
        analysis = analyze_rows(rows, out)
        body["pointing_modes_s"] = mode_locations(analysis, "pointing")
        body["acquisition_modes_s"] = mode_locations(analysis, "acquisition")
    return body


# --------------------------------------------------------------------------
# sweeps


def sweep_csv(results: dict[str, SweepResult]) -> str:
    rows = []
    for label in sorted(results):
        res = results[label]
        for v, m in zip(res.parameter_values, res.mean_delay):
            rows.append([label, fmt(v), fmt(m)])
    return csv_text(SWEEP_COLUMNS, rows)


# --------------------------------------------------------------------------
# contact plans


@dataclass(frozen=True)
class ContactPlanRow:
    line: int
    from_id: str
    to_id: str
    start_s: float
    end_s: float
    prev_target_from: str | None = None
    prev_target_to: str | None = None
    raw: dict | None = None


def parse_plan(text: str, source: str = "<plan>") -> tuple[list[str], list[ContactPlanRow]]:
    reader = csv.DictReader(io.StringIO(text))
    header = reader.fieldnames
    if not header:
        raise MalformedRow(f"{source}:1: empty plan, expected header {','.join(PLAN_REQUIRED)}")
    missing = [c for c in PLAN_REQUIRED if c not in header]
    if missing:
        raise MalformedRow(f"{source}:1: missing column(s) {', '.join(missing)}")
    rows = []
    for i, raw in enumerate(reader):
        line = reader.line_num
        if None in raw or any(raw[c] is None for c in header):
            raise MalformedRow(f"{source}:{line}: expected {len(header)} fields")
        try:
            start = float(raw["start_s"])
            end = float(raw["end_s"])
        except ValueError as exc:
            raise MalformedRow(f"{source}:{line}: {exc}") from None
        if not (math.isfinite(start) and math.isfinite(end)) or not start < end:
            raise MalformedRow(f"{source}:{line}: start_s must be finite and precede end_s")
        if start < 0:
            raise MalformedRow(f"{source}:{line}: start_s must be >= 0")
        if not raw["from_id"] or not raw["to_id"] or raw["from_id"] == raw["to_id"]:
            raise MalformedRow(f"{source}:{line}: from_id and to_id must be distinct, non-empty")
        rows.append(ContactPlanRow(
            line, raw["from_id"], raw["to_id"], start, end,
            raw.get("prev_target_from") or None, raw.get("prev_target_to") or None, raw,
        ))
    return list(header), rows


def _state_towards(doc: ConfigDocument, node_id: str, target_id: str, t: float) -> NodeState:
    nodes = doc.scenario.node_map
    node, target = nodes[node_id], nodes[target_id]
    direction, _, _ = line_of_sight(propagate(node, t), propagate(target, t))
    local = unit(local_frame(node, t).to_local(direction))
    return NodeState(local, target.node_class)


def annotate_row(row: ContactPlanRow, doc: ConfigDocument, source: str = "<plan>") -> ContactRecord:
    """PAT breakdown for one planned contact.

    A prev_target column points that endpoint at the named node at the
    contact start; without it the endpoint is treated as a first contact.
    """
    nodes = doc.scenario.node_map
    for col, nid in (("from_id", row.from_id), ("to_id", row.to_id),
                     ("prev_target_from", row.prev_target_from), ("prev_target_to", row.prev_target_to)):
        if nid is not None and nid not in nodes:
            raise UnknownNode(f"{source}:{row.line}: {col} {nid!r} is not a node in the config")
    states: dict[str, NodeState] = {}
    for nid, prev in ((row.from_id, row.prev_target_from), (row.to_id, row.prev_target_to)):
        if prev is not None:
            if prev == nid:
                raise MalformedRow(f"{source}:{row.line}: node {nid} cannot target itself")
            states[nid] = _state_towards(doc, nid, prev, row.start_s)
    try:
        contact = Contact(row.from_id, row.to_id, row.start_s, row.end_s)
    except ValidationError as exc:
        raise MalformedRow(f"{source}:{row.line}: {exc}") from None
    return evaluate_contact(contact, states, doc.scenario)


def annotate_csv(text: str, doc: ConfigDocument, source: str = "<plan>") -> str:
    header, rows = parse_plan(text, source)
    out_header = list(header) + [c for c in ANNOTATE_COLUMNS if c not in header]
    out_rows = []
    for row in rows:
        rec = annotate_row(row, doc, source)
        pat = rec.breakdown.t_total
        duration = row.end_s - row.start_s
        values = dict(row.raw)
        values["t_pat_s"] = fmt(pat)
        values["effective_duration_s"] = fmt(max(0.0, duration - pat))
        values["infeasible"] = "true" if pat > duration else "false"
        out_rows.append([values[c] for c in out_header])
    return csv_text(out_header, out_rows)

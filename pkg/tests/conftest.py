import json
import os
import sys
import time
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

# every property test runs a thousand generated cases
settings.register_profile(
    "invariants",
    max_examples=1000,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("invariants")

# Invariants each module promises; every id needs at least one passing
# property test marked ``@pytest.mark.invariant(<id>)``.
INVARIANTS = {
    "geometry": [
        "angle_symmetric", "angle_scale_invariant", "angle_clamped",
        "projection_increasing", "azel_round_trip",
    ],
    "pointing": [
        "delay_monotone", "delay_homogeneous", "link_symmetric", "delay_envelope",
    ],
    "acquisition": [
        "range_invariant", "quadratic_scaling", "group_structure",
        "spiral_oracle", "acq_monotone",
    ],
    "tracking": [
        "samples_monotone", "inverse_frequency", "monte_carlo_consistent",
    ],
    "scenario": [
        "deterministic", "breakdown_sum", "class_partition", "los_continuity",
        "class_ordering",
    ],
    "stats": [
        "histogram_conserves", "kde_normalized", "modes_scale_invariant",
        "sweep_inverse_rate", "fou_superlinear",
    ],
    "cli_io": [
        "round_trip", "csv_format", "exit_codes",
    ],
}
ALL_INVARIANTS = {f"{m}.{i}" for m, ids in INVARIANTS.items() for i in ids}

INVARIANT_RESULTS: dict[str, list[str]] = {}
# acceptance criterion number -> (outcome, detail)
CRITERIA: dict[int, tuple[str, str]] = {}
DUMP_ENV = "PATSIM_INVARIANT_DUMP"
_SESSION_START = time.perf_counter()


def pytest_configure(config):
    config.addinivalue_line("markers", "invariant(id): property test for a listed invariant")
    config.addinivalue_line("markers", "acceptance_last: run after every other test")
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number n")


def pytest_collection_modifyitems(items):
    # the invariant roll-up reads the outcomes of everything before it
    last = [it for it in items if it.get_closest_marker("acceptance_last")]
    rest = [it for it in items if not it.get_closest_marker("acceptance_last")]
    items[:] = rest + last


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when != "call":
        return
    outcome_name = "xfailed" if hasattr(report, "wasxfail") else report.outcome
    for mark in item.iter_markers("invariant"):
        INVARIANT_RESULTS.setdefault(mark.args[0], []).append(outcome_name)
    mark = item.get_closest_marker("criterion")
    if mark is not None:
        detail = getattr(item, "criterion_detail", "")
        if report.failed and not detail:
            detail = report.longrepr.reprcrash.message if hasattr(report.longrepr, "reprcrash") else ""
        CRITERIA[mark.args[0]] = (outcome_name, detail)


def pytest_sessionfinish(session):
    path = os.environ.get(DUMP_ENV)
    if path:
        with open(path, "w") as fh:
            json.dump(INVARIANT_RESULTS, fh)


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        outcome, detail = CRITERIA[n]
        verdict = "PASS" if outcome == "passed" else "FAIL"
        note = " (expected, see notes)" if outcome == "xfailed" else ""
        terminalreporter.write_line(f"criterion {n:2d}: {verdict}{note}  {detail}".rstrip())


def session_elapsed() -> float:
    return time.perf_counter() - _SESSION_START


@pytest.fixture(scope="session")
def reference_config():
    from patsim.config import load_reference

    return load_reference()


@pytest.fixture(scope="session")
def reference_run(reference_config):
    from patsim.scenario import simulate

    t0 = time.perf_counter()
    result = simulate(reference_config.scenario)
    return result, time.perf_counter() - t0

"""Histograms, Gaussian KDE, mode detection and parameter sweeps over delay samples."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np
from scipy.signal import find_peaks

from .acquisition import acquisition_delay, build_geometry
from .errors import DegenerateSamples, EmptySamples, InvalidGeometry, ValidationError
from .pointing import pointing_delay_one_side
from .scenario import (
    ContactRecord,
    LinkTransitionClass,
    Scenario,
    SimulationResult,
    simulate,
)
from .terminal import TerminalSpec

KDE_GRID_POINTS = 512
DEFAULT_MIN_PROMINENCE = 0.05
DEFAULT_FLATNESS_S = 5.0
NOMINAL_RANGE_M = 1.0e6
RESOLUTION = 1e-9


class Bin(NamedTuple):
    lower: float
    upper: float
    count: int


class Mode(NamedTuple):
    location: float
    density: float


@dataclass(frozen=True)
class KdeCurve:
    x: np.ndarray
    density: np.ndarray
    bandwidth: float

    def integral(self) -> float:
        return float(np.trapezoid(self.density, self.x))


def _as_samples(samples: Iterable[float]) -> np.ndarray:
    x = np.asarray(list(samples) if not isinstance(samples, np.ndarray) else samples, dtype=float)
    if x.size == 0:
        raise EmptySamples("no samples")
    if not np.all(np.isfinite(x)):
        raise ValidationError("samples must be finite")
    return x


def histogram(samples: Iterable[float], bin_width: float = 1.0) -> list[Bin]:
    """Left-closed bins of ``bin_width`` starting at floor(min(samples))."""
    x = _as_samples(samples)
    if not bin_width > 0:
        raise ValidationError(f"bin_width must be > 0 (got {bin_width})")
    start = math.floor(float(x.min()))
    top = float(x.max())
    n = int(math.floor((top - start) / bin_width)) + 1
    edges = start + np.arange(n + 2) * bin_width
    # assign against the emitted edges so rounding never puts a sample outside its bin
    idx = np.searchsorted(edges, x, side="right") - 1
    counts = np.bincount(idx, minlength=n + 1)
    last = int(idx.max())
    e, c = edges.tolist(), counts.tolist()
    return [Bin(e[i], e[i + 1], c[i]) for i in range(last + 1)]


def silverman_bandwidth(x: np.ndarray) -> float:
    n = x.size
    sigma = float(np.std(x, ddof=1))
    q75, q25 = np.percentile(x, [75, 25])
    iqr = float(q75 - q25)
    # a zero IQR (heavily tied data) would collapse the bandwidth; fall back to sigma
    spread = min(sigma, iqr / 1.34) if iqr > 0 else sigma
    return 0.9 * spread * n ** (-0.2)


def kde(samples: Iterable[float], bandwidth: float | str | None = None) -> KdeCurve:
    """Gaussian KDE on a uniform grid over [min - 3h, max + 3h].

    ``bandwidth`` of None or "auto" selects Silverman's rule; either way it is
    floored at about one grid step so every kernel is resolved by the grid.
    The curve is renormalized to unit trapezoid mass because the truncated
    tails would otherwise lose up to ~0.1% of it.
    """
    x = np.sort(_as_samples(samples))
    span = float(x[-1] - x[0])
    # spreads below ~1e-9 relative are float noise, not a distribution
    if x.size < 2 or span <= RESOLUTION * max(1.0, float(np.abs(x).max())):
        raise DegenerateSamples("KDE needs at least two distinct samples")
    if bandwidth is None or bandwidth == "auto":
        h = silverman_bandwidth(x)
    else:
        h = float(bandwidth)
        if not h > 0:
            raise ValidationError(f"kde bandwidth must be > 0 (got {bandwidth})")
    h = max(h, span / (KDE_GRID_POINTS - 7))
    grid = np.linspace(x[0] - 3 * h, x[-1] + 3 * h, KDE_GRID_POINTS)
    density = np.zeros_like(grid)
    # chunk over samples to bound memory on large inputs
    for lo in range(0, x.size, 2048):
        z = (grid[:, None] - x[None, lo:lo + 2048]) / h
        density += np.exp(-0.5 * z * z).sum(axis=1)
    density /= x.size * h * math.sqrt(2 * math.pi)
    density /= np.trapezoid(density, grid)
    return KdeCurve(grid, density, h)


def detect_modes(curve: KdeCurve, min_prominence: float = DEFAULT_MIN_PROMINENCE) -> list[Mode]:
    """Local maxima with prominence of at least ``min_prominence`` x the global max."""
    d = curve.density
    top = float(d.max())
    if top <= 0:
        return []
    # pad so a maximum sitting on the grid edge still counts as a peak
    padded = np.concatenate([[0.0], d, [0.0]])
    peaks, _ = find_peaks(padded, prominence=min_prominence * top)
    return [Mode(float(curve.x[p - 1]), float(d[p - 1])) for p in sorted(peaks)]


@dataclass
class DelayDistribution:
    samples: np.ndarray
    bins: list[Bin]
    kde: KdeCurve | None
    modes: list[Mode]
    class_label: str

    @classmethod
    def from_samples(
        cls,
        samples: Iterable[float],
        class_label: str,
        bin_width: float = 1.0,
        bandwidth: float | str | None = None,
        min_prominence: float = DEFAULT_MIN_PROMINENCE,
        strict: bool = True,
    ) -> "DelayDistribution":
        """With ``strict=False`` a degenerate sample set yields no KDE instead of raising."""
        x = np.sort(_as_samples(samples))
        bins = histogram(x, bin_width)
        try:
            curve = kde(x, bandwidth)
        except DegenerateSamples:
            if strict:
                raise
            return cls(x, bins, None, [], class_label)
        return cls(x, bins, curve, detect_modes(curve, min_prominence), class_label)


@dataclass
class SweepResult:
    parameter_name: str
    parameter_values: list[float]
    mean_delay: list[float]
    class_label: str
    counts: list[int] = field(default_factory=list)

    def __post_init__(self) -> None:
        if len(self.parameter_values) != len(self.mean_delay):
            raise ValidationError("parameter_values and mean_delay differ in length")
        _check_increasing(self.parameter_values, self.parameter_name)

    @property
    def spread(self) -> float:
        return max(self.mean_delay) - min(self.mean_delay)

    def is_flat(self, threshold: float = DEFAULT_FLATNESS_S) -> bool:
        return self.spread < threshold

    def is_strictly_decreasing(self) -> bool:
        return all(b < a for a, b in zip(self.mean_delay, self.mean_delay[1:]))

    def is_strictly_increasing(self) -> bool:
        return all(b > a for a, b in zip(self.mean_delay, self.mean_delay[1:]))


def _check_increasing(values: Sequence[float], name: str) -> None:
    if not values:
        raise ValidationError(f"{name} grid is empty")
    if any(not b > a for a, b in zip(values, values[1:])):
        raise ValidationError(f"{name} grid must be strictly increasing")


def _records(source) -> list[ContactRecord]:
    if isinstance(source, Scenario):
        return simulate(source).records
    if isinstance(source, SimulationResult):
        return source.records
    return list(source)


def sweep_slew_rate(
    source,
    rates: Sequence[float],
    sequential_axes: bool = False,
    include_first_contact: bool = False,
) -> dict[str, SweepResult]:
    """Mean pointing delay per transition class with every gimbal set to each rate.

    ``source`` is a Scenario (simulated first), a SimulationResult or a list
    of ContactRecords; the recorded slew angles are reused, so only the rates
    change between grid points.
    """
    rates = [float(r) for r in rates]
    _check_increasing(rates, "slew_rate")
    if any(r <= 0 for r in rates):
        raise ValidationError("slew rates must be > 0")
    groups: dict[str, list[ContactRecord]] = {}
    for rec in _records(source):
        label = rec.breakdown.transition_class
        if label is LinkTransitionClass.FIRST_CONTACT and not include_first_contact:
            continue
        groups.setdefault(label.value, []).append(rec)
    out = {}
    for label in sorted(groups):
        recs = groups[label]
        means = []
        for rate in rates:
            spec = _RateOnly(rate)
            total = 0.0
            for rec in recs:
                total += max(
                    pointing_delay_one_side(rec.slew_a, spec, sequential_axes),
                    pointing_delay_one_side(rec.slew_b, spec, sequential_axes),
                )
            means.append(total / len(recs))
        out[label] = SweepResult("slew_rate", rates, means, label, [len(recs)] * len(rates))
    return out


@dataclass(frozen=True)
class _RateOnly:
    """Stand-in spec exposing only the gimbal rates the pointing model reads."""

    rate: float

    @property
    def slew_rate_az(self) -> float:
        return self.rate

    @property
    def slew_rate_el(self) -> float:
        return self.rate


def _check_fou_grid(fous: Sequence[float], specs: Iterable[TerminalSpec]) -> list[float]:
    fous = [float(f) for f in fous]
    _check_increasing(fous, "fou")
    for spec in specs:
        bad = [f for f in fous if f <= spec.beam_width]
        if bad:
            raise InvalidGeometry(
                f"FOU {bad[0]} deg does not exceed the beam width {spec.beam_width} deg"
            )
    return fous


def sweep_fou(
    specs: Mapping[str, TerminalSpec],
    fous: Sequence[float],
    range_m: float = NOMINAL_RANGE_M,
    geometric_d_mode: bool = False,
    expected_fraction: float = 1.0,
) -> dict[str, SweepResult]:
    """T_acq per labelled terminal spec at each FOU (deg), both ends sharing the spec.

    The seek time does not depend on range (FOU, beam and FSM sweep all scale
    with it), so ``range_m`` only has to be positive.
    """
    fous = _check_fou_grid(fous, specs.values())
    out = {}
    for label in sorted(specs):
        means = []
        for f in fous:
            spec = specs[label].replace(fou=f)
            geom = build_geometry(range_m, spec, spec, geometric_d_mode)
            means.append(acquisition_delay(geom, spec, expected_fraction).t_acq)
        out[label] = SweepResult("fou", fous, means, label, [1] * len(fous))
    return out


def sweep_fou_records(
    result: SimulationResult, fous: Sequence[float]
) -> dict[str, SweepResult]:
    """Mean T_acq per acquisition class with every terminal's FOU set to each value,
    keeping each contact's seeker and range."""
    nodes = result.scenario.node_map
    opts = result.scenario.options
    recs = [r for r in result.records if r.acq_class]
    fous = _check_fou_grid(fous, {nodes[r.seeker].spec for r in recs})
    groups: dict[str, list[ContactRecord]] = {}
    for r in recs:
        groups.setdefault(r.acq_class, []).append(r)
    out = {}
    for label in sorted(groups):
        means = []
        for f in fous:
            total = 0.0
            for r in groups[label]:
                a, b = r.contact.node_a, r.contact.node_b
                starer = b if r.seeker == a else a
                seek = nodes[r.seeker].spec.replace(fou=f)
                stare = nodes[starer].spec.replace(fou=f)
                geom = build_geometry(r.range_m, seek, stare, opts.geometric_d_mode)
                total += acquisition_delay(geom, seek, opts.expected_fraction).t_acq
            means.append(total / len(groups[label]))
        n = len(groups[label])
        out[label] = SweepResult("fou", fous, means, label, [n] * len(fous))
    return out

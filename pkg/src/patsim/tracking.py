"""Transition from acquisition to closed-loop tracking.

The controller polls the track sensor at ``f`` Hz and moves a lock counter
up by one on a good sample and down by two on a bad one; tracking starts once
the counter reaches ``alpha``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonConvergent, TrackingTimeout, ValidationError
from .terminal import TerminalSpec

DEFAULT_MAX_SAMPLES = 10_000_000
_CHUNK = 4096


@dataclass(frozen=True)
class TrackingParams:
    poll_frequency: float
    p_signal: float
    alpha: float

    def __post_init__(self) -> None:
        if not self.poll_frequency > 0:
            raise ValidationError("poll_frequency must be > 0")
        if not 0 < self.p_signal <= 1:
            raise ValidationError("p_signal must lie in (0, 1]")
        if not self.alpha > 0:
            raise ValidationError("alpha must be > 0")

    @classmethod
    def from_terminal(cls, spec: TerminalSpec) -> "TrackingParams":
        return cls(spec.poll_frequency, spec.p_signal, spec.alpha)


def expected_drift(p_signal: float) -> float:
    """Mean counter increment per sample, ``p - 2(1 - p)``."""
    return 3.0 * p_signal - 2.0


def n_samples(params: TrackingParams) -> int:
    drift = expected_drift(params.p_signal)
    if drift <= 1e-12:
        raise NonConvergent(
            f"p_signal={params.p_signal} gives non-positive counter drift; "
            "the lock counter never reaches alpha on average"
        )
    # 3*0.7 - 2 is 0.0999...; round before ceil so exact ratios stay exact
    return math.ceil(round(params.alpha / drift, 9))


def acq_to_track_delay(params: TrackingParams) -> float:
    return n_samples(params) / params.poll_frequency


def _first_passage(
    rng: np.random.Generator,
    p: float,
    alpha: float,
    floor: bool,
    max_samples: int,
) -> int | None:
    level = 0.0
    running_min = 0.0
    done = 0
    while done < max_samples:
        size = min(_CHUNK, max_samples - done)
        steps = np.where(rng.random(size) < p, 1.0, -2.0)
        walk = level + np.cumsum(steps)
        if floor:
            # a counter clamped at zero is the free walk minus its running minimum
            mins = np.minimum.accumulate(np.minimum(walk, running_min))
            counter = walk - np.minimum(mins, 0.0)
        else:
            counter = walk
        hit = np.flatnonzero(counter >= alpha)
        if hit.size:
            return done + int(hit[0]) + 1
        level = float(walk[-1])
        if floor:
            running_min = float(mins[-1])
        done += size
    return None


def simulate_tracking_transition(
    params: TrackingParams,
    seed=None,
    allow_negative_counter: bool = True,
    max_samples: int = DEFAULT_MAX_SAMPLES,
) -> float:
    """Run the lock-counter process once and return the time to reach alpha.

    With ``allow_negative_counter=False`` the counter is clamped at zero.
    """
    rng = np.random.default_rng(seed)
    n = _first_passage(rng, params.p_signal, params.alpha, not allow_negative_counter, max_samples)
    if n is None:
        raise TrackingTimeout(
            f"lock counter did not reach alpha={params.alpha} within {max_samples} samples"
        )
    return n / params.poll_frequency


def simulate_tracking_batch(
    params: TrackingParams,
    n_trials: int,
    seed=None,
    allow_negative_counter: bool = True,
    max_samples: int = DEFAULT_MAX_SAMPLES,
) -> np.ndarray:
    """Independent first-passage times (s) for ``n_trials`` runs sharing one seed."""
    seeds = np.random.SeedSequence(seed).spawn(n_trials)
    out = np.empty(n_trials)
    for i, ss in enumerate(seeds):
        out[i] = simulate_tracking_transition(
            params, np.random.default_rng(ss), allow_negative_counter, max_samples
        )
    return out


def expected_first_passage(p_signal: float, alpha: int, allow_negative_counter: bool = False) -> float:
    """Exact mean number of samples to first reach ``alpha`` (integer) from 0.

    For the unclamped walk the +1 steps never overshoot, so Wald's identity
    gives ``alpha / drift`` exactly. The clamped walk is solved as an
    absorbing Markov chain on counter values ``0 .. alpha-1``.
    """
    drift = expected_drift(p_signal)
    if drift <= 0:
        raise NonConvergent("non-positive drift has no finite mean first-passage time")
    if allow_negative_counter:
        return alpha / drift
    a = int(alpha)
    A = np.eye(a)
    for s in range(a):
        if s + 1 < a:
            A[s, s + 1] -= p_signal
        A[s, max(0, s - 2)] -= 1.0 - p_signal
    return float(np.linalg.solve(A, np.ones(a))[0])

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from patsim.errors import NonConvergent, TrackingTimeout, ValidationError
from patsim.tracking import (
    TrackingParams,
    acq_to_track_delay,
    expected_first_passage,
    n_samples,
    simulate_tracking_batch,
    simulate_tracking_transition,
)


def test_n_samples_examples():
    assert n_samples(TrackingParams(1000, 1.0, 10)) == 10
    assert n_samples(TrackingParams(1000, 0.7, 10)) == 100
    with pytest.raises(NonConvergent):
        n_samples(TrackingParams(1000, 2 / 3, 10))


def test_delay_examples():
    assert acq_to_track_delay(TrackingParams(1000, 0.7, 10)) == pytest.approx(0.1)
    assert acq_to_track_delay(TrackingParams(1000, 1.0, 1000)) == pytest.approx(1.0)
    assert acq_to_track_delay(TrackingParams(1000, 0.7, 1000)) == pytest.approx(10.0)
    # default alpha
    assert acq_to_track_delay(TrackingParams(1000, 0.7, 100)) == pytest.approx(1.0)


def test_params_validation():
    for bad in ((0, 0.7, 10), (1000, 0.0, 10), (1000, 1.1, 10), (1000, 0.7, 0)):
        with pytest.raises(ValidationError):
            TrackingParams(*bad)


def test_deterministic_path():
    params = TrackingParams(1000, 1.0, 5)
    assert simulate_tracking_transition(params, seed=1) == 0.005
    assert simulate_tracking_transition(params, seed=1, allow_negative_counter=False) == 0.005


def test_seeded_reproducible():
    params = TrackingParams(1000, 0.7, 10)
    assert simulate_tracking_transition(params, 5) == simulate_tracking_transition(params, 5)
    a = simulate_tracking_batch(params, 50, seed=3)
    assert np.array_equal(a, simulate_tracking_batch(params, 50, seed=3))


def test_negative_drift_times_out():
    params = TrackingParams(1000, 0.5, 10)
    with pytest.raises(TrackingTimeout):
        simulate_tracking_transition(params, seed=0, max_samples=100_000)
    # a counter clamped at zero reflects, so it reaches alpha eventually
    t = simulate_tracking_transition(params, seed=0, allow_negative_counter=False,
                                     max_samples=10_000_000)
    assert 0.01 <= t < 10_000


def test_floor_matches_python_loop_pathwise():
    # the vectorized reflection trick must reproduce the clamped counter exactly
    rng = np.random.default_rng(11)
    for _ in range(200):
        p = rng.uniform(0.55, 0.95)
        steps = np.where(rng.random(3000) < p, 1, -2)
        c, first = 0, None
        for i, s in enumerate(steps):
            c = max(0, c + s)
            if c >= 20:
                first = i + 1
                break
        walk = np.cumsum(steps)
        counter = walk - np.minimum(np.minimum.accumulate(walk), 0)
        hit = np.flatnonzero(counter >= 20)
        assert (hit[0] + 1 if hit.size else None) == first


@pytest.mark.parametrize("p,alpha,expected", [
    (0.7, 10, 100.0), (0.7, 100, 1000.0), (0.9, 10, 10 / 0.7),
])
def test_unclamped_mean_is_wald(p, alpha, expected):
    assert expected_first_passage(p, alpha, allow_negative_counter=True) == pytest.approx(expected)


def test_clamped_mean_small_case():
    # alpha = 1: first success ends it, so the mean is geometric 1/p
    assert expected_first_passage(0.8, 1) == pytest.approx(1 / 0.8)


@pytest.mark.invariant("tracking.samples_monotone")
@given(st.floats(0.67, 1.0), st.floats(0.67, 1.0), st.floats(0.1, 1e4), st.floats(0.0, 1e3))
def test_samples_monotone(p1, p2, alpha, extra):
    lo, hi = sorted((p1, p2))
    if lo <= 2 / 3 + 1e-9:
        return
    n_lo = n_samples(TrackingParams(1, lo, alpha))
    n_hi = n_samples(TrackingParams(1, hi, alpha))
    assert n_hi <= n_lo
    if hi > lo:
        # strict in the real-valued ratio; ceil keeps it non-increasing
        assert alpha / (3 * hi - 2) < alpha / (3 * lo - 2)
    more = n_samples(TrackingParams(1, lo, alpha + extra))
    assert more >= n_lo
    # adding a full drift-worth of counter always costs at least one sample
    assert n_samples(TrackingParams(1, lo, alpha + 1.001 * (3 * lo - 2))) > n_lo


@pytest.mark.invariant("tracking.inverse_frequency")
@given(st.floats(0.7, 1.0), st.floats(1.0, 1e3), st.floats(1.0, 1e5))
def test_inverse_frequency(p, alpha, f):
    base = acq_to_track_delay(TrackingParams(f, p, alpha))
    assert acq_to_track_delay(TrackingParams(2 * f, p, alpha)) == pytest.approx(base / 2, rel=1e-15)


MC_GRID = [(p, a) for p in (0.7, 0.8, 0.9) for a in (10, 100)]


@pytest.mark.invariant("tracking.monte_carlo_consistent")
@pytest.mark.parametrize("floor", [False, True], ids=["unclamped", "clamped"])
@pytest.mark.parametrize("p,alpha", MC_GRID)
def test_monte_carlo_consistent(p, alpha, floor):
    n = 10_000
    params = TrackingParams(1.0, p, alpha)  # f = 1 Hz: times are sample counts
    lib = simulate_tracking_batch(params, n, seed=2024, allow_negative_counter=not floor)
    ref = oracles.counter_first_passage_lockstep(p, alpha, n, seed=77, floor=floor)
    se = math.sqrt(lib.var(ddof=1) / n + ref.var(ddof=1) / n)
    assert abs(lib.mean() - ref.mean()) <= 3 * se
    # and both agree with the exact mean
    exact = expected_first_passage(p, alpha, allow_negative_counter=not floor)
    assert abs(lib.mean() - exact) <= 3 * math.sqrt(lib.var(ddof=1) / n)

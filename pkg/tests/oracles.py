"""Brute-force reference implementations used to check the library.

Nothing here imports patsim; every formula is re-derived with plain math so a
shared bug cannot hide in both places.
"""

from __future__ import annotations

import math
import random
from fractions import Fraction

import numpy as np


def _dot(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def _cross(a, b):
    return (a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0])


def angle(a, b) -> float:
    """Angle via atan2(|a x b|, a.b), well conditioned everywhere."""
    c = _cross(a, b)
    return math.atan2(math.sqrt(_dot(c, c)), _dot(a, b))


def az_el(v, east, north, up):
    e, n, u = _dot(v, east), _dot(v, north), _dot(v, up)
    r = math.sqrt(e * e + n * n + u * u)
    el = math.asin(max(-1.0, min(1.0, u / r)))
    horiz = math.hypot(e, n)
    az = 0.0 if horiz <= 1e-12 * r else math.atan2(e, n) % (2 * math.pi)
    return az, el


def slew_deltas(v_init, v_link, east=(1, 0, 0), north=(0, 1, 0), up=(0, 0, 1)):
    az1, el1 = az_el(v_init, east, north, up)
    az2, el2 = az_el(v_link, east, north, up)
    daz = abs(az1 - az2) % (2 * math.pi)
    daz = min(daz, 2 * math.pi - daz)
    return angle(v_init, v_link), daz, abs(el1 - el2)


def pointing_delay_side(v_init, v_link, rate_az_deg, rate_el_deg, sequential=False):
    _, daz, d_el = slew_deltas(v_init, v_link)
    t_az = daz * 180.0 / math.pi / rate_az_deg
    t_el = d_el * 180.0 / math.pi / rate_el_deg
    return t_az + t_el if sequential else max(t_az, t_el)


def acquisition(range_m, fou_deg, beam_deg, tip_rad_s, tilt_rad_s, dwell_s):
    """(N, N_d, N_h, T_seek, T_acq) for the hexagonal-spiral search."""
    R = range_m * math.tan(fou_deg * math.pi / 360.0)
    d = range_m * math.tan(beam_deg * math.pi / 360.0)
    area_ratio = 2.0 * math.pi * R * R / (math.sqrt(3.0) * d * d)
    n = 0
    while n < area_ratio:
        n += 1
    groups = 0
    while 6 * groups < n:
        groups += 1
    nd, nh = 4 * groups, 2 * groups
    v_tip, v_tilt = range_m * tip_rad_s, range_m * tilt_rad_s
    t_seek = nd * d / min(v_tip, v_tilt) + nh * d / v_tip
    return n, nd, nh, t_seek, t_seek + n * dwell_s


def tracking_samples(p_signal: float, alpha: float) -> int:
    """Smallest N with N*p - 2N(1-p) >= alpha, in exact rational arithmetic
    on the decimal values of the inputs."""
    p = Fraction(repr(p_signal))
    a = Fraction(repr(alpha))
    drift = 3 * p - 2
    if drift <= 0:
        raise ArithmeticError("non-positive drift")
    n = a / drift
    return n.numerator // n.denominator + (n.numerator % n.denominator != 0)


def spiral_walk_time(n_steps: int, d: float, v_tip: float, v_tilt: float) -> float:
    """Walk the search pattern one step at a time and add up traversal times.

    Each ring group of six steps is four diagonal moves (60/120/240/300 deg)
    and two horizontal ones (0/180 deg); the walk stops after ``n_steps``.
    A horizontal move only uses the tip axis; a diagonal one waits for the
    slower of the two axes.
    """
    headings = (60.0, 120.0, 180.0, 240.0, 300.0, 0.0)
    t = 0.0
    x = y = 0.0
    for i in range(n_steps):
        h = math.radians(headings[i % 6])
        dx, dy = d * math.cos(h), d * math.sin(h)
        x, y = x + dx, y + dy
        if abs(dy) < 1e-9 * d:
            t += d / v_tip
        else:
            t += d / min(v_tip, v_tilt)
    return t


def counter_first_passage(p_signal: float, alpha: float, rng: random.Random,
                          floor: bool, max_samples: int = 10_000_000) -> int:
    """One run of the lock counter as a plain Python loop."""
    c = 0
    for n in range(1, max_samples + 1):
        c += 1 if rng.random() < p_signal else -2
        if floor and c < 0:
            c = 0
        if c >= alpha:
            return n
    raise RuntimeError("no first passage")


def counter_first_passage_lockstep(p_signal, alpha, n_trials, seed, floor):
    """All trials advanced together, one sample per iteration."""
    rng = np.random.Generator(np.random.PCG64(seed))
    counter = np.zeros(n_trials)
    done_at = np.zeros(n_trials, dtype=np.int64)
    live = np.ones(n_trials, dtype=bool)
    n = 0
    while live.any():
        n += 1
        k = int(live.sum())
        step = np.where(rng.random(k) < p_signal, 1.0, -2.0)
        c = counter[live] + step
        if floor:
            c = np.maximum(c, 0.0)
        counter[live] = c
        hit = np.flatnonzero(live)[c >= alpha]
        done_at[hit] = n
        live[hit] = False
    return done_at


def random_unit(rng: random.Random):
    while True:
        v = (rng.gauss(0, 1), rng.gauss(0, 1), rng.gauss(0, 1))
        r = math.sqrt(_dot(v, v))
        if r > 1e-6:
            return tuple(x / r for x in v)

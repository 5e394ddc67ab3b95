import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from patsim.errors import ZeroVector
from patsim.geometry import vec3
from patsim.pointing import (
    PointingState,
    SlewRequirement,
    pointing_delay_link,
    pointing_delay_one_side,
    slew_requirement,
)
from patsim.terminal import preset

LEO = preset("leo_table1")
IPN = preset("ipn_table1")
N, E, U = vec3(0, 1, 0), vec3(1, 0, 0), vec3(0, 0, 1)

angles = st.floats(0.0, math.pi)
rates = st.floats(0.01, 20.0)
coord = st.floats(-1.0, 1.0)
directions = st.tuples(coord, coord, coord).filter(lambda v: np.linalg.norm(v) > 1e-2)


def spec(az, el):
    return IPN.replace(slew_rate_az=az, slew_rate_el=el)


def req_deg(az, el, total=0.0):
    return SlewRequirement(math.radians(total), math.radians(az), math.radians(el))


def test_slew_requirement_examples():
    assert slew_requirement(PointingState(N, N)) == SlewRequirement(0.0, 0.0, 0.0)
    r = slew_requirement(PointingState(N, E))
    assert (r.total_angle, r.delta_az, r.delta_el) == pytest.approx((math.pi / 2, math.pi / 2, 0.0))
    r = slew_requirement(PointingState(N, (N + U) / math.sqrt(2)))
    assert (r.total_angle, r.delta_az, r.delta_el) == pytest.approx((math.pi / 4, 0.0, math.pi / 4))


def test_slew_requirement_zero_vector():
    with pytest.raises(ZeroVector):
        slew_requirement(PointingState(vec3(0, 0, 0), N))


def test_one_side_examples():
    assert pointing_delay_one_side(req_deg(90, 0), spec(1, 1)) == pytest.approx(90.0)
    assert pointing_delay_one_side(req_deg(0, 0), LEO) == 0.0
    assert pointing_delay_one_side(req_deg(40, 30), LEO) == pytest.approx(60.0)
    assert pointing_delay_one_side(req_deg(40, 30), LEO, sequential_axes=True) == pytest.approx(80.0)


def test_link_examples():
    a = PointingState(N, E)  # 90 deg azimuth
    b = PointingState(N, vec3(math.sin(math.radians(40)), math.cos(math.radians(40)), 0))
    assert pointing_delay_link(a, spec(1, 1), b, spec(2, 2)) == pytest.approx(90.0)
    still = PointingState(N, N)
    assert pointing_delay_link(still, IPN, still, LEO) == 0.0


@pytest.mark.invariant("pointing.delay_monotone")
@given(angles, angles, angles, rates, rates, st.floats(1.0, 5.0))
def test_delay_monotone(d_az, d_el, extra, w_az, w_el, k):
    base = pointing_delay_one_side(SlewRequirement(0, d_az, d_el), spec(w_az, w_el))
    more_az = pointing_delay_one_side(SlewRequirement(0, d_az + extra, d_el), spec(w_az, w_el))
    more_el = pointing_delay_one_side(SlewRequirement(0, d_az, d_el + extra), spec(w_az, w_el))
    faster = pointing_delay_one_side(SlewRequirement(0, d_az, d_el), spec(w_az * k, w_el * k))
    faster_az = pointing_delay_one_side(SlewRequirement(0, d_az, d_el), spec(w_az * k, w_el))
    assert more_az >= base and more_el >= base
    assert faster <= base and faster_az <= base


@pytest.mark.invariant("pointing.delay_homogeneous")
@given(angles, angles, rates, rates, st.floats(0.1, 10.0), st.booleans())
def test_delay_homogeneous(d_az, d_el, w_az, w_el, k, seq):
    base = pointing_delay_one_side(SlewRequirement(0, d_az, d_el), spec(w_az, w_el), seq)
    scaled = pointing_delay_one_side(
        SlewRequirement(0, d_az * k, d_el * k), spec(w_az * k, w_el * k), seq
    )
    assert scaled == pytest.approx(base, rel=1e-12, abs=1e-12)


@pytest.mark.invariant("pointing.link_symmetric")
@given(directions, directions, directions, directions, rates, rates, rates, rates)
def test_link_symmetric(a0, a1, b0, b1, wa1, wa2, wb1, wb2):
    sa, sb = PointingState(np.array(a0), np.array(a1)), PointingState(np.array(b0), np.array(b1))
    ta, tb = spec(wa1, wa2), spec(wb1, wb2)
    assert pointing_delay_link(sa, ta, sb, tb) == pointing_delay_link(sb, tb, sa, ta)


@pytest.mark.invariant("pointing.delay_envelope")
@given(directions, directions, rates, rates)
def test_delay_envelope(v0, v1, w_az, w_el):
    # The great-circle slew is at most the az + el path, hence <= 2 max(daz, del),
    # and the slower axis never needs more than max(daz, del) / min(rate).
    req = slew_requirement(PointingState(np.array(v0), np.array(v1)))
    s = spec(w_az, w_el)
    t = pointing_delay_one_side(req, s)
    fast = math.radians(max(w_az, w_el))
    slow = math.radians(min(w_az, w_el))
    # arccos resolves angles near zero only to ~sqrt(eps) rad
    assert t >= (req.total_angle - 1e-7) / (2 * fast)
    assert t <= max(req.delta_az, req.delta_el) / slow + 1e-9

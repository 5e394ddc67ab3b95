import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from patsim.errors import DegenerateFrame, InvalidAngle, ZeroVector
from patsim.geometry import (
    STANDARD_FRAME,
    AzEl,
    LocalFrame,
    angle_between,
    angular_separation_az_el,
    frame_from_up_north,
    from_az_el,
    project_angle_to_length,
    to_az_el,
    unit,
    vec3,
)

coord = st.floats(-1e3, 1e3, allow_nan=False)
vectors = st.tuples(coord, coord, coord).filter(lambda v: np.linalg.norm(v) > 1e-3)
scales = st.floats(1e-3, 1e3)


def test_angle_examples():
    assert angle_between((1, 0, 0), (0, 1, 0)) == pytest.approx(math.pi / 2)
    assert angle_between((1, 0, 0), (1, 0, 0)) == 0.0
    assert angle_between((1, 0, 0), (1, 1, 0)) == pytest.approx(math.pi / 4, abs=1e-12)


def test_angle_zero_vector():
    with pytest.raises(ZeroVector):
        angle_between((0, 0, 0), (1, 0, 0))
    with pytest.raises(ZeroVector):
        unit((0, 0, 0))


def test_az_el_examples():
    assert to_az_el(vec3(0, 0, 1)) == AzEl(0.0, math.pi / 2)
    az, el = to_az_el(vec3(0, 1, 0))
    assert (az, el) == (0.0, 0.0)
    az, el = to_az_el(vec3(1, 0, 1))
    assert az == pytest.approx(math.pi / 2)
    assert el == pytest.approx(math.pi / 4)


def test_az_el_rejects_bad_frame():
    bad = LocalFrame(vec3(0, 0, 0), vec3(1, 0, 0), vec3(1, 0, 0), vec3(0, 0, 1))
    with pytest.raises(DegenerateFrame):
        to_az_el(vec3(1, 0, 0), bad)
    with pytest.raises(ZeroVector):
        to_az_el(vec3(0, 0, 0))


def test_separation_examples():
    d_az, d_el = angular_separation_az_el(AzEl(0.1, 0), AzEl(2 * math.pi - 0.1, 0))
    assert d_az == pytest.approx(0.2)
    assert angular_separation_az_el(AzEl(1.0, 0.2), AzEl(1.0, 0.2)) == (0.0, 0.0)
    d_az, d_el = angular_separation_az_el(AzEl(0, 0.3), AzEl(1.0, -0.2))
    assert (d_az, d_el) == pytest.approx((1.0, 0.5))


def test_projection_examples():
    assert project_angle_to_length(1000.0, math.pi / 2) == pytest.approx(1000.0)
    assert project_angle_to_length(1e6, math.radians(0.2)) == pytest.approx(1745.33, abs=0.01)
    assert project_angle_to_length(1e6, math.radians(1.0)) == pytest.approx(8726.87, abs=0.01)
    for bad in (0.0, math.pi, -0.1):
        with pytest.raises(InvalidAngle):
            project_angle_to_length(1.0, bad)


def test_frame_from_up_north_is_orthonormal():
    f = frame_from_up_north(vec3(1, 2, 3), vec3(1, 1, 1), vec3(0, 0, 1))
    f.validate()
    assert np.allclose(np.cross(f.east, f.north), f.up)


@pytest.mark.invariant("geometry.angle_symmetric")
@given(vectors, vectors)
def test_angle_symmetric(a, b):
    assert angle_between(a, b) == angle_between(b, a)


@pytest.mark.invariant("geometry.angle_scale_invariant")
@given(vectors, vectors, scales, scales)
def test_angle_scale_invariant(a, b, k, m):
    scaled = angle_between(np.multiply(k, a), np.multiply(m, b))
    assert scaled == pytest.approx(angle_between(a, b), abs=1e-7)


@pytest.mark.invariant("geometry.angle_clamped")
@given(vectors, st.floats(-1e-12, 1e-12), st.floats(1e-6, 1e6))
def test_angle_clamped(a, eps, k):
    a = np.asarray(a)
    for b in (a * k * (1 + eps), -a * k * (1 + eps), a + eps * np.linalg.norm(a)):
        theta = angle_between(a, b)
        assert math.isfinite(theta) and 0.0 <= theta <= math.pi


@pytest.mark.invariant("geometry.projection_increasing")
@given(
    st.floats(1.0, 1e9), st.floats(1.001, 10.0),
    st.floats(1e-4, 3.0), st.floats(1e-4, 0.1),
)
def test_projection_increasing(rng, k, theta, dtheta):
    assume(theta + dtheta < math.pi)
    base = project_angle_to_length(rng, theta)
    assert project_angle_to_length(rng * k, theta) > base
    assert project_angle_to_length(rng, theta + dtheta) > base


@pytest.mark.invariant("geometry.azel_round_trip")
@given(vectors, vectors, vectors)
def test_azel_round_trip(v, up, hint):
    assume(angle_between(up, hint) > 0.05 and angle_between(up, hint) < math.pi - 0.05)
    frame = frame_from_up_north(vec3(0, 0, 0), up, hint)
    u = unit(v)
    assume(abs(float(np.dot(u, frame.up))) < 1 - 1e-9)
    back = from_az_el(to_az_el(u, frame), frame)
    assert np.allclose(back, u, atol=1e-9)


@given(vectors)
def test_azel_ranges(v):
    az, el = to_az_el(v, STANDARD_FRAME)
    assert 0.0 <= az < 2 * math.pi
    assert -math.pi / 2 <= el <= math.pi / 2

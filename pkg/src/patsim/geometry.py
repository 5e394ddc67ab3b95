"""Vector and angular primitives used by the PAT delay models.

Directions are plain ``numpy`` arrays of shape (3,). Azimuth is measured from
north toward east, elevation above the east-north plane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DegenerateFrame, InvalidAngle, ZeroVector

TWO_PI = 2.0 * math.pi
POLE_TOL = 1e-12
FRAME_TOL = 1e-9

Vec3 = np.ndarray


def vec3(x: float, y: float, z: float) -> Vec3:
    return np.array([x, y, z], dtype=float)


def norm3(v) -> float:
    """Euclidean norm of a single 3-vector (cheaper than ``np.linalg.norm``)."""
    x, y, z = v
    return math.hypot(x, y, z)


def cross3(a, b) -> Vec3:
    """Cross product of two single 3-vectors."""
    ax, ay, az = a
    bx, by, bz = b
    return np.array([ay * bz - az * by, az * bx - ax * bz, ax * by - ay * bx])


def unit(v) -> Vec3:
    """Return ``v / |v|``; raises :class:`ZeroVector` for a zero-norm input."""
    v = np.asarray(v, dtype=float)
    n = norm3(v)
    if n == 0.0 or not math.isfinite(n):
        raise ZeroVector(f"cannot normalize vector {v!r}")
    return v / n


class AzEl(NamedTuple):
    azimuth: float
    elevation: float


@dataclass(frozen=True)
class LocalFrame:
    """Node-local east/north/up triad."""

    origin: Vec3
    east: Vec3
    north: Vec3
    up: Vec3

    def validate(self) -> None:
        axes = (self.east, self.north, self.up)
        for ax in axes:
            if abs(norm3(ax) - 1.0) > FRAME_TOL:
                raise DegenerateFrame("frame axis is not unit-norm")
        for i in range(3):
            for j in range(i + 1, 3):
                if abs(float(np.dot(axes[i], axes[j]))) > FRAME_TOL:
                    raise DegenerateFrame("frame axes are not orthogonal")

    def to_local(self, v) -> Vec3:
        """Components of direction ``v`` along (east, north, up)."""
        v = np.asarray(v, dtype=float)
        return np.array([np.dot(v, self.east), np.dot(v, self.north), np.dot(v, self.up)])

    def to_global(self, local) -> Vec3:
        e, n, u = local
        return e * self.east + n * self.north + u * self.up


STANDARD_FRAME = LocalFrame(
    origin=vec3(0, 0, 0), east=vec3(1, 0, 0), north=vec3(0, 1, 0), up=vec3(0, 0, 1)
)


def frame_from_up_north(origin, up, north_hint) -> LocalFrame:
    """Build an orthonormal frame from an up vector and an approximate north.

    ``north_hint`` is orthogonalized against ``up``; east completes the
    right-handed triad (east x north = up).
    """
    up = unit(up)
    north_hint = np.asarray(north_hint, dtype=float)
    north = north_hint - np.dot(north_hint, up) * up
    north = unit(north)
    east = cross3(north, up)
    return LocalFrame(np.asarray(origin, dtype=float), east, north, up)


def angle_between(a, b) -> float:
    """Angle in radians between two non-zero vectors, in [0, pi]."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    na = norm3(a)
    nb = norm3(b)
    if na == 0.0 or nb == 0.0:
        raise ZeroVector("angle_between needs two non-zero vectors")
    c = float(np.dot(a, b)) / (na * nb)
    return math.acos(min(1.0, max(-1.0, c)))


def to_az_el(v, frame: LocalFrame = STANDARD_FRAME) -> AzEl:
    frame.validate()
    e, n, u = frame.to_local(unit(v))
    el = math.asin(min(1.0, max(-1.0, u)))
    if abs(abs(el) - math.pi / 2) <= POLE_TOL or (e == 0.0 and n == 0.0):
        return AzEl(0.0, math.copysign(math.pi / 2, el))
    az = math.atan2(e, n) % TWO_PI
    if az >= TWO_PI:
        az = 0.0
    return AzEl(az, el)


def from_az_el(azel: AzEl, frame: LocalFrame = STANDARD_FRAME) -> Vec3:
    az, el = azel
    local = (math.cos(el) * math.sin(az), math.cos(el) * math.cos(az), math.sin(el))
    return frame.to_global(local)


def angular_separation_az_el(a: AzEl, b: AzEl) -> tuple[float, float]:
    """Shortest wrap-around azimuth difference and absolute elevation difference."""
    d = abs(a.azimuth - b.azimuth) % TWO_PI
    d_az = min(d, TWO_PI - d)
    return d_az, abs(a.elevation - b.elevation)


def project_angle_to_length(range_m: float, full_angle: float) -> float:
    """Linear size ``range * tan(angle / 2)`` subtended by a full cone angle at range."""
    if not (0.0 < full_angle < math.pi):
        raise InvalidAngle(f"full angle {full_angle} rad outside (0, pi)")
    if not range_m > 0:
        raise InvalidAngle(f"range must be positive, got {range_m}")
    return range_m * math.tan(full_angle / 2.0)

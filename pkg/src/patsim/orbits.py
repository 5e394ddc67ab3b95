"""Idealized two-body geometry: circular LEO orbits, a spherical rotating
Earth for ground sites, and fixed deep-space directions.

All functions accept scalar or array time and return ECI positions in meters.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import CoincidentNodes
from .geometry import LocalFrame, cross3, norm3, vec3

MU_EARTH = 3.986004418e14  # m^3/s^2
EARTH_RADIUS = 6_371_000.0  # m
ATMOSPHERE_MARGIN = 100_000.0  # m
EARTH_ROTATION_RATE = 7.2921159e-5  # rad/s, sidereal


def orbital_period(altitude_km: float) -> float:
    a = EARTH_RADIUS + altitude_km * 1e3
    return 2.0 * math.pi * math.sqrt(a**3 / MU_EARTH)


def _leo_basis(inclination_deg: float, raan_deg: float):
    i = math.radians(inclination_deg)
    o = math.radians(raan_deg)
    # perifocal x/y axes of a circular orbit (argument of latitude from the node)
    p = np.array([math.cos(o), math.sin(o), 0.0])
    q = np.array([-math.sin(o) * math.cos(i), math.cos(o) * math.cos(i), math.sin(i)])
    return p, q


def leo_position(orbit, t) -> np.ndarray:
    """ECI position(s) of a circular orbit; ``orbit`` has altitude_km,
    inclination_deg, raan_deg, true_anomaly_deg."""
    a = EARTH_RADIUS + orbit.altitude_km * 1e3
    n = math.sqrt(MU_EARTH / a**3)
    u = math.radians(orbit.true_anomaly_deg) + n * np.asarray(t, dtype=float)
    p, q = _leo_basis(orbit.inclination_deg, orbit.raan_deg)
    return a * (np.multiply.outer(np.cos(u), p) + np.multiply.outer(np.sin(u), q))


def leo_frame(orbit, t: float) -> LocalFrame:
    """Orbital frame: up along the radius, north along the velocity."""
    a = EARTH_RADIUS + orbit.altitude_km * 1e3
    n = math.sqrt(MU_EARTH / a**3)
    u = math.radians(orbit.true_anomaly_deg) + n * t
    p, q = _leo_basis(orbit.inclination_deg, orbit.raan_deg)
    up = math.cos(u) * p + math.sin(u) * q
    north = -math.sin(u) * p + math.cos(u) * q
    return LocalFrame(a * up, cross3(north, up), north, up)


def _site_angles(site, t):
    lat = math.radians(site.latitude_deg)
    lon = math.radians(site.longitude_deg) + EARTH_ROTATION_RATE * np.asarray(t, dtype=float)
    return lat, lon


def ground_position(site, t) -> np.ndarray:
    lat, lon = _site_angles(site, t)
    x = EARTH_RADIUS * math.cos(lat) * np.cos(lon)
    y = EARTH_RADIUS * math.cos(lat) * np.sin(lon)
    z = EARTH_RADIUS * math.sin(lat) * np.ones_like(lon)
    return np.stack([x, y, z], axis=-1)


def ground_frame(site, t: float) -> LocalFrame:
    """Topocentric east-north-up frame."""
    lat, lon = _site_angles(site, t)
    lon = float(lon)
    sl, cl = math.sin(lat), math.cos(lat)
    so, co = math.sin(lon), math.cos(lon)
    east = vec3(-so, co, 0.0)
    north = vec3(-sl * co, -sl * so, cl)
    up = vec3(cl * co, cl * so, sl)
    return LocalFrame(EARTH_RADIUS * up, east, north, up)


def deep_space_position(direction, t) -> np.ndarray:
    pos = np.asarray(direction.unit, dtype=float) * direction.range_m
    t = np.asarray(t, dtype=float)
    return np.broadcast_to(pos, t.shape + (3,)).copy()


def deep_space_frame(direction) -> LocalFrame:
    """Inertial frame whose north points back at Earth.

    Earth-bound targets then sit near zero azimuth and elevation, away from
    the azimuth singularity at the poles.
    """
    north = -np.asarray(direction.unit, dtype=float)
    z = vec3(0, 0, 1)
    hint = z if abs(float(np.dot(z, north))) < 0.9 else vec3(1, 0, 0)
    up = hint - np.dot(hint, north) * north
    up = up / norm3(up)
    return LocalFrame(-north * direction.range_m, cross3(north, up), north, up)


def occlusion_radius(a_norm: float, b_norm: float) -> float:
    shell = EARTH_RADIUS + ATMOSPHERE_MARGIN
    if min(a_norm, b_norm) < shell:
        # a surface endpoint sits inside the atmosphere shell; test the solid Earth
        return EARTH_RADIUS
    return shell


def segment_occluded(a, b, radius: float) -> np.ndarray:
    """True where the open segment a->b passes strictly inside a sphere of
    ``radius`` centred at the origin. Works on (..., 3) arrays."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    ab = b - a
    ab2 = np.einsum("...i,...i->...", ab, ab)
    s = -np.einsum("...i,...i->...", a, ab) / np.where(ab2 > 0, ab2, 1.0)
    s = np.clip(s, 0.0, 1.0)
    closest = a + s[..., None] * ab
    dist = np.linalg.norm(closest, axis=-1)
    interior = (s > 0.0) & (s < 1.0)
    # 1 m slack keeps surface endpoints from self-occluding through rounding
    return interior & (dist < radius - 1.0)


def line_of_sight(a_pos, b_pos):
    """Unit direction a->b, range in meters, and whether the Earth blocks it."""
    a = np.asarray(a_pos, dtype=float)
    b = np.asarray(b_pos, dtype=float)
    diff = b - a
    rng = norm3(diff)
    if rng == 0.0:
        raise CoincidentNodes("line of sight between coincident positions")
    radius = occlusion_radius(norm3(a), norm3(b))
    occluded = bool(segment_occluded(a, b, radius))
    return diff / rng, rng, occluded

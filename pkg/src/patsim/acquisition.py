"""Beam-search (seek) delay over the field of uncertainty.

The seeker tiles the FOU disk with beam spots on a hexagonal spiral and
dwells at each spot; the stare terminal holds its track sensor on the FOU
until it sees the beam.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidGeometry, StareFovViolation
from .geometry import project_angle_to_length
from .terminal import TerminalSpec

SQRT3 = math.sqrt(3.0)
# guards ceil() against float noise on exact-integer area ratios
_CEIL_RTOL = 1e-12


@dataclass(frozen=True)
class AcquisitionGeometry:
    range: float
    fou_radius: float
    beam_diameter: float
    fou_angle_seek: float
    fou_angle_stare: float
    stare_sensor_fov: float

    def validate(self) -> None:
        if not (self.range > 0 and self.fou_radius > 0 and self.beam_diameter > 0):
            raise InvalidGeometry("range, FOU radius and beam diameter must be positive")
        if not self.fou_radius > self.beam_diameter / 2:
            raise InvalidGeometry(
                f"FOU radius {self.fou_radius:.6g} m does not exceed half the beam "
                f"diameter {self.beam_diameter:.6g} m"
            )
        if not self.stare_sensor_fov > self.fou_angle_stare:
            raise StareFovViolation(
                f"stare track-sensor FOV {self.stare_sensor_fov} deg must be larger "
                f"than its FOU {self.fou_angle_stare} deg"
            )


@dataclass(frozen=True)
class SearchPlan:
    n_steps: int
    n_diagonal: int
    n_horizontal: int
    step_length: float
    tip_speed: float
    tilt_speed: float


@dataclass(frozen=True)
class AcquisitionResult:
    t_seek: float
    dwell_total: float
    t_acq: float
    plan: SearchPlan | None


def build_geometry(
    range_m: float,
    seeker: TerminalSpec,
    starer: TerminalSpec,
    geometric_d_mode: bool = False,
) -> AcquisitionGeometry:
    """Project the seeker's FOU and beam widths to linear sizes at ``range_m``.

    By default the beam diameter uses the same ``D tan(theta/2)`` projection as
    the FOU radius. ``geometric_d_mode`` doubles it to a true diameter.
    """
    R = project_angle_to_length(range_m, math.radians(seeker.fou))
    d = project_angle_to_length(range_m, math.radians(seeker.beam_width))
    if geometric_d_mode:
        d *= 2.0
    return AcquisitionGeometry(
        range=range_m,
        fou_radius=R,
        beam_diameter=d,
        fou_angle_seek=seeker.fou,
        fou_angle_stare=starer.fou,
        stare_sensor_fov=starer.track_sensor_fov,
    )


def n_steps(R: float, d: float) -> int:
    """Number of beam spots needed to tile a FOU of radius R with spots of size d."""
    if not (R > 0 and d > 0):
        raise InvalidGeometry(f"R and d must be positive (R={R}, d={d})")
    q = R / d
    ratio = 2.0 * math.pi * q * q / SQRT3
    if not math.isfinite(ratio):
        raise InvalidGeometry(f"spot count overflows (R={R}, d={d})")
    return math.ceil(ratio * (1.0 - _CEIL_RTOL))


def ring_groups(steps: int) -> int:
    return -(-steps // 6)


def fsm_linear_speed(range_m: float, fsm_rate: float) -> float:
    """Sweep speed (m/s) of the beam spot at range for an FSM angular rate (rad/s)."""
    if not (range_m > 0 and fsm_rate > 0):
        raise InvalidGeometry(f"range and FSM rate must be positive ({range_m}, {fsm_rate})")
    return range_m * fsm_rate


def search_plan(steps: int, d: float, tip_speed: float, tilt_speed: float) -> SearchPlan:
    groups = ring_groups(steps)
    return SearchPlan(
        n_steps=steps,
        n_diagonal=4 * groups,
        n_horizontal=2 * groups,
        step_length=d,
        tip_speed=tip_speed,
        tilt_speed=tilt_speed,
    )


def seek_time(plan: SearchPlan) -> float:
    d = plan.step_length
    diagonal = plan.n_diagonal * d / min(plan.tip_speed, plan.tilt_speed)
    horizontal = plan.n_horizontal * d / plan.tip_speed
    return diagonal + horizontal


def acquisition_delay(
    geometry: AcquisitionGeometry,
    seeker: TerminalSpec,
    expected_fraction: float = 1.0,
) -> AcquisitionResult:
    """Worst-case seek time, total dwell and their sum for one link.

    ``expected_fraction`` scales the number of visited spots, e.g. 0.5 for the
    mean over a uniformly placed partner.
    """
    if seeker.beaconless:
        return AcquisitionResult(0.0, 0.0, 0.0, None)
    if not 0 < expected_fraction <= 1:
        raise InvalidGeometry(f"expected_fraction must lie in (0, 1], got {expected_fraction}")
    geometry.validate()
    steps = n_steps(geometry.fou_radius, geometry.beam_diameter)
    if expected_fraction < 1:
        steps = math.ceil(steps * expected_fraction)
    plan = search_plan(
        steps,
        geometry.beam_diameter,
        fsm_linear_speed(geometry.range, seeker.fsm_tip_rate),
        fsm_linear_speed(geometry.range, seeker.fsm_tilt_rate),
    )
    t_seek = seek_time(plan)
    dwell = steps * seeker.dwell_time
    return AcquisitionResult(t_seek, dwell, t_seek + dwell, plan)


# axial hex-lattice neighbour offsets at 0, 60, ..., 300 deg
_AXIAL = [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)]


def _hex_ring(k: int) -> list[tuple[int, int]]:
    q, r = k * _AXIAL[4][0], k * _AXIAL[4][1]
    out = []
    for dq, dr in _AXIAL:
        for _ in range(k):
            out.append((q, r))
            q, r = q + dq, r + dr
    return out


def _hex_distance(a: tuple[int, int], b: tuple[int, int]) -> int:
    dq, dr = a[0] - b[0], a[1] - b[1]
    return (abs(dq) + abs(dr) + abs(dq + dr)) // 2


def hex_spiral(n_spots: int, spacing: float = 1.0) -> list[tuple[float, float]]:
    """Beam-spot centres of a hexagonal spiral scan, starting at the boresight.

    Spots are visited ring by ring; each ring is entered from the last spot of
    the previous one by a single lattice move and walked around in one sense.
    Consecutive spots are always exactly ``spacing`` apart.
    """
    if n_spots <= 0:
        return []
    cells = [(0, 0)]
    k = 0
    while len(cells) < n_spots:
        k += 1
        ring = _hex_ring(k)
        last = cells[-1]
        j = next(i for i, c in enumerate(ring) if _hex_distance(c, last) == 1)
        cells.extend(ring[j:] + ring[:j])
    half_root3 = SQRT3 / 2.0
    return [((q + r / 2.0) * spacing, r * half_root3 * spacing) for q, r in cells[:n_spots]]

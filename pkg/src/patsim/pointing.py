"""Coarse-pointing (gimbal slew) delay."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import STANDARD_FRAME, LocalFrame, angle_between, angular_separation_az_el, to_az_el
from .terminal import TerminalSpec


@dataclass(frozen=True)
class PointingState:
    """Current boresight and the line of sight required for the next link."""

    v_init: np.ndarray
    v_link: np.ndarray
    frame: LocalFrame = field(default=STANDARD_FRAME)


@dataclass(frozen=True)
class SlewRequirement:
    total_angle: float
    delta_az: float
    delta_el: float


ZERO_SLEW = SlewRequirement(0.0, 0.0, 0.0)


def slew_requirement(state: PointingState) -> SlewRequirement:
    total = angle_between(state.v_init, state.v_link)
    d_az, d_el = angular_separation_az_el(
        to_az_el(state.v_init, state.frame), to_az_el(state.v_link, state.frame)
    )
    return SlewRequirement(total, d_az, d_el)


def pointing_delay_one_side(
    req: SlewRequirement, spec: TerminalSpec, sequential_axes: bool = False
) -> float:
    """Seconds for one gimbal to complete the slew.

    Both axes move at once, so the slower axis sets the delay. With
    ``sequential_axes`` the axis times are summed instead.
    """
    t_az = req.delta_az / math.radians(spec.slew_rate_az)
    t_el = req.delta_el / math.radians(spec.slew_rate_el)
    if sequential_axes:
        return t_az + t_el
    return max(t_az, t_el)


def pointing_delay_link(
    state_a: PointingState,
    spec_a: TerminalSpec,
    state_b: PointingState,
    spec_b: TerminalSpec,
    sequential_axes: bool = False,
) -> float:
    # acquisition waits for both ends to finish slewing
    return max(
        pointing_delay_one_side(slew_requirement(state_a), spec_a, sequential_axes),
        pointing_delay_one_side(slew_requirement(state_b), spec_b, sequential_axes),
    )

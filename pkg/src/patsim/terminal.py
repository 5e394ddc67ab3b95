"""Optical terminal hardware parameters and the Table-1 presets."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from .errors import ValidationError

DEFAULT_ALPHA = 100.0
MIN_P_SIGNAL = 2.0 / 3.0


@dataclass(frozen=True)
class TerminalSpec:
    """Per-terminal PAT hardware parameters.

    Units follow the usual datasheet conventions: gimbal slew rates in deg/s,
    fast-steering-mirror rates in rad/s, angular widths as full angles in
    degrees, polling frequency in Hz.
    """

    slew_rate_az: float
    slew_rate_el: float
    fsm_tip_rate: float
    fsm_tilt_rate: float
    dwell_time: float
    beam_width: float
    fou: float
    track_sensor_fov: float
    poll_frequency: float
    p_signal: float
    alpha: float = DEFAULT_ALPHA
    beaconless: bool = False

    def validate(self, allow_wide_beam: bool = False) -> None:
        positive = (
            "slew_rate_az", "slew_rate_el", "fsm_tip_rate", "fsm_tilt_rate",
            "beam_width", "fou", "track_sensor_fov", "poll_frequency", "alpha",
        )
        for name in positive:
            if not getattr(self, name) > 0:
                raise ValidationError(f"{name} must be > 0 (got {getattr(self, name)})")
        if not self.dwell_time >= 0:
            raise ValidationError(f"dwell_time must be >= 0 (got {self.dwell_time})")
        if not 0 < self.p_signal <= 1:
            raise ValidationError(f"p_signal must lie in (0, 1] (got {self.p_signal})")
        if not self.p_signal > MIN_P_SIGNAL:
            raise ValidationError(
                f"p_signal must exceed 2/3 for the tracking counter to converge (got {self.p_signal})"
            )
        if self.beam_width >= 180 or self.fou >= 180 or self.track_sensor_fov >= 180:
            raise ValidationError("angular widths must be below 180 deg")
        if not allow_wide_beam and not self.beam_width < self.fou:
            raise ValidationError(
                f"beam_width ({self.beam_width} deg) must be smaller than fou ({self.fou} deg)"
            )

    def replace(self, **changes) -> "TerminalSpec":
        return dataclasses.replace(self, **changes)


# the presets carry no quad-cell FOV of their own; 3 deg keeps the stare constraint satisfied
# across the whole 0.25-2 deg FOU sweep.
DEFAULT_TRACK_SENSOR_FOV = 3.0

PRESETS: dict[str, TerminalSpec] = {
    "ipn_table1": TerminalSpec(
        slew_rate_az=1.0,
        slew_rate_el=1.0,
        fsm_tip_rate=5.0e-3,
        fsm_tilt_rate=5.0e-3,
        dwell_time=0.5,
        beam_width=0.2,
        fou=1.0,
        track_sensor_fov=DEFAULT_TRACK_SENSOR_FOV,
        poll_frequency=1000.0,
        p_signal=0.7,
    ),
    "leo_table1": TerminalSpec(
        slew_rate_az=2.0,
        slew_rate_el=0.5,
        fsm_tip_rate=8.5e-3,
        fsm_tilt_rate=8.5e-3,
        dwell_time=0.5,
        beam_width=0.2,
        fou=0.75,
        track_sensor_fov=DEFAULT_TRACK_SENSOR_FOV,
        poll_frequency=1000.0,
        p_signal=0.7,
    ),
}


def preset(name: str) -> TerminalSpec:
    try:
        return PRESETS[name]
    except KeyError:
        raise ValidationError(
            f"unknown terminal preset {name!r}; choose from {sorted(PRESETS)}"
        ) from None

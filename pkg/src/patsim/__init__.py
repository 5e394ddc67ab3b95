"""Pointing, acquisition and tracking (PAT) delay models for optical space links."""

from .acquisition import acquisition_delay, build_geometry, hex_spiral, n_steps
from .errors import PatError
from .pointing import PointingState, pointing_delay_link, pointing_delay_one_side
from .terminal import PRESETS, TerminalSpec, preset
from .tracking import TrackingParams, acq_to_track_delay, simulate_tracking_transition

__version__ = "0.1.0"

__all__ = [
    "PRESETS",
    "PatError",
    "PointingState",
    "TerminalSpec",
    "TrackingParams",
    "acq_to_track_delay",
    "acquisition_delay",
    "build_geometry",
    "hex_spiral",
    "n_steps",
    "pointing_delay_link",
    "pointing_delay_one_side",
    "preset",
    "simulate_tracking_transition",
]

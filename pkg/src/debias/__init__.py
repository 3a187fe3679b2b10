"""Zone-wise affine bias correction of deterministic air-quality maps.

Fuses reference-station and micro-sensor measurements to estimate a
piecewise-affine bias of an initial deterministic concentration map over
Voronoi constancy zones, producing corrected maps and, as a by-product,
per-sensor calibrations.
"""

from .core_model import (
    Device,
    Kind,
    Measurement,
    SensorCalibration,
    TimeSlot,
    ZoneParameters,
    apply_bias,
    bias_at,
    correct,
    sensor_expected,
    sensor_invert,
)
from .estimation import FittedModel, Observation, ParamMode, Strategy, fit_strategy
from .mapops import GridMap, MapStack, combine_initial, correct_map, read_grid, write_grid
from .zoning import Zoning, ZoningMode, assign, build_zones

__all__ = [
    "Device", "Kind", "Measurement", "SensorCalibration", "TimeSlot",
    "ZoneParameters", "apply_bias", "bias_at", "correct", "sensor_expected",
    "sensor_invert", "FittedModel", "Observation", "ParamMode", "Strategy",
    "fit_strategy", "GridMap", "MapStack", "combine_initial", "correct_map",
    "read_grid", "write_grid", "Zoning", "ZoningMode", "assign", "build_zones",
]

__version__ = "0.1.0"

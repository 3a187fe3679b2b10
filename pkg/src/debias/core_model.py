"""Measurement and bias algebra.

Reference stations read the true concentration plus centered noise; each
micro-sensor reads an affine distortion ``alpha * P + beta`` plus noise.
The initial deterministic map carries a zone-wise affine bias
``B = C + rho * P``, so the map value is ``P_tilde = C + (1 + rho) * P``
and the correction is the closed-form inverse ``(P_tilde - C) / (1 + rho)``.

All types here are immutable values and all operations are pure functions.
"""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass, field
from enum import Enum

from .errors import DegenerateGain, SingularZone

# Guards for the two inversion singularities.  The model itself puts no
# bound on rho or alpha; these only turn infinities into explicit errors.
EPS_DEN = 1e-6
EPS_ALPHA = 1e-6


class Kind(str, Enum):
    STATION = "station"
    SENSOR = "sensor"


@dataclass(frozen=True)
class Device:
    """A fixed measuring unit: reference station or micro-sensor."""

    id: str
    kind: Kind
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"device {self.id}: non-finite location")

    @property
    def location(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True, order=True)
class TimeSlot:
    """One hourly slot: a calendar day plus an hour index 0-23."""

    date: dt.date
    hour: int

    def __post_init__(self):
        if not 0 <= self.hour <= 23:
            raise ValueError(f"hour out of range: {self.hour}")

    def key(self) -> str:
        return f"{self.date.isoformat()}T{self.hour:02d}"

    @classmethod
    def parse(cls, text: str) -> "TimeSlot":
        date_part, _, hour_part = text.partition("T")
        return cls(dt.date.fromisoformat(date_part), int(hour_part))


@dataclass(frozen=True)
class Measurement:
    device_id: str
    slot: TimeSlot
    value: float

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError(f"non-finite measurement for {self.device_id}")


@dataclass(frozen=True)
class ZoneParameters:
    """Affine map bias on one constancy zone: intercept C, slope rho, noise variance."""

    C: float
    rho: float
    sigma2: float = 0.0

    def __post_init__(self):
        if self.sigma2 < 0:
            raise ValueError("sigma2 must be nonnegative")


IDENTITY_PARAMS = ZoneParameters(C=0.0, rho=0.0)


@dataclass(frozen=True)
class SensorCalibration:
    """Micro-sensor response: gain alpha, offset beta, noise variance."""

    alpha: float
    beta: float
    sigma2: float = 0.0

    def __post_init__(self):
        if self.sigma2 < 0:
            raise ValueError("sigma2 must be nonnegative")

    @property
    def degenerate(self) -> bool:
        return abs(self.alpha) < EPS_ALPHA


@dataclass
class ClampCounter:
    """Mutable tally of negative corrected values truncated to zero."""

    count: int = 0
    by_zone: dict = field(default_factory=dict)

    def record(self, zone_id: int | None = None):
        self.count += 1
        if zone_id is not None:
            self.by_zone[zone_id] = self.by_zone.get(zone_id, 0) + 1


def bias_at(zp: ZoneParameters, p_true: float) -> float:
    """Map bias at true concentration p_true: C + rho * p."""
    return zp.C + zp.rho * p_true


def apply_bias(zp: ZoneParameters, p_true: float) -> float:
    """Forward model: initial-map value for a given true concentration."""
    return p_true + bias_at(zp, p_true)


def correct(
    zp: ZoneParameters,
    p_tilde: float,
    clamp: bool = False,
    counter: ClampCounter | None = None,
    zone_id: int | None = None,
) -> float:
    """Invert the bias: recover the true concentration from a map value.

    With ``clamp`` set, negative results are truncated to zero and the event
    is recorded on ``counter`` (negative values are otherwise preserved, as
    they flag model misbehaviour).
    """
    den = 1.0 + zp.rho
    if abs(den) < EPS_DEN:
        raise SingularZone(f"1 + rho = {den:g} below guard {EPS_DEN:g}")
    value = (p_tilde - zp.C) / den
    if clamp and value < 0.0:
        if counter is not None:
            counter.record(zone_id)
        return 0.0
    return value


def sensor_expected(cal: SensorCalibration, p_true: float) -> float:
    """Noiseless sensor reading: alpha * p + beta."""
    return cal.alpha * p_true + cal.beta


def sensor_invert(cal: SensorCalibration, x: float) -> float:
    """Recover the true concentration from a sensor reading."""
    if abs(cal.alpha) < EPS_ALPHA:
        raise DegenerateGain(f"|alpha| = {abs(cal.alpha):g} below guard {EPS_ALPHA:g}")
    return (x - cal.beta) / cal.alpha

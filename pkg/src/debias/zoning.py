"""Voronoi constancy zones.

Zones are represented implicitly by the nearest-generator rule: the zone of
a point is the zone of its closest generator (Euclidean distance in the
projected CRS, ties broken by lexicographically smallest generator id).
Every zone must contain at least one reference station for the bias
parameters to be identifiable; micro-sensors falling in zones without one
are omitted from fitting.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .core_model import Device, Kind
from .errors import DuplicateLocation, EmptyNetwork


class ZoningMode(str, Enum):
    STATIONS_ONLY = "stations"
    ALL_DEVICES = "all"


@dataclass(frozen=True)
class Zone:
    id: int
    generator: str  # device id


@dataclass(frozen=True)
class Zoning:
    zones: tuple[Zone, ...]
    generators: tuple[Device, ...]
    mode: ZoningMode
    # generator coordinates ordered by ascending id, so the first argmin in a
    # distance scan implements the smallest-id tie rule
    _order: tuple[int, ...] = field(repr=False, default=())

    @property
    def K(self) -> int:
        return len(self.zones)

    def sorted_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(xs, ys, zone_ids) with generators sorted by id."""
        xs = np.array([self.generators[i].x for i in self._order], dtype=np.float64)
        ys = np.array([self.generators[i].y for i in self._order], dtype=np.float64)
        ids = np.array([self.zones[i].id for i in self._order], dtype=np.int64)
        return xs, ys, ids

    def zone_by_generator(self, device_id: str) -> Zone:
        for z in self.zones:
            if z.generator == device_id:
                return z
        raise KeyError(device_id)


def build_zones(generators: list[Device], mode: ZoningMode) -> Zoning:
    """Build the Voronoi partition generated by the given devices.

    Zone ids are 1..K in input order.  In stations-only mode every
    generator must be a reference station.
    """
    if not generators:
        raise EmptyNetwork("no generators")
    seen: dict[tuple[float, float], str] = {}
    for g in generators:
        if mode is ZoningMode.STATIONS_ONLY and g.kind is not Kind.STATION:
            raise ValueError(f"generator {g.id} is not a station (stations-only mode)")
        loc = (g.x, g.y)
        if loc in seen:
            raise DuplicateLocation(f"{g.id} and {seen[loc]} share location {loc}")
        seen[loc] = g.id
    zones = tuple(Zone(id=k + 1, generator=g.id) for k, g in enumerate(generators))
    order = tuple(sorted(range(len(generators)), key=lambda i: generators[i].id))
    return Zoning(zones=zones, generators=tuple(generators), mode=mode, _order=order)


def assign(zoning: Zoning, x: float, y: float) -> int:
    """Zone id of the generator nearest to (x, y)."""
    xs, ys, ids = zoning.sorted_arrays()
    d2 = (xs - x) ** 2 + (ys - y) ** 2
    return int(ids[int(np.argmin(d2))])  # first min = smallest id on ties


def assign_many(zoning: Zoning, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Vectorized assign for coordinate arrays of equal shape."""
    gx, gy, ids = zoning.sorted_arrays()
    px = np.asarray(xs, dtype=np.float64).ravel()
    py = np.asarray(ys, dtype=np.float64).ravel()
    d2 = (px[:, None] - gx[None, :]) ** 2 + (py[:, None] - gy[None, :]) ** 2
    return ids[np.argmin(d2, axis=1)].reshape(np.shape(xs))


@dataclass(frozen=True)
class IdentifiabilityReport:
    ok: bool
    offending_zones: tuple[int, ...]
    omitted_devices: tuple[str, ...]


def device_roster(zoning: Zoning, devices: list[Device]) -> dict[int, tuple[list[Device], list[Device]]]:
    """Partition devices by assigned zone: zone id -> (stations, sensors)."""
    roster: dict[int, tuple[list[Device], list[Device]]] = {
        z.id: ([], []) for z in zoning.zones
    }
    for d in devices:
        zid = assign(zoning, d.x, d.y)
        stations, sensors = roster[zid]
        (stations if d.kind is Kind.STATION else sensors).append(d)
    return roster


def validate_identifiability(zoning: Zoning, devices: list[Device]) -> IdentifiabilityReport:
    """Check that every zone holds at least one reference station.

    Zones without one cannot have their bias fitted; micro-sensors assigned
    to such zones are listed for omission.
    """
    roster = device_roster(zoning, devices)
    offending = []
    omitted = []
    for zid, (stations, sensors) in sorted(roster.items()):
        if not stations:
            offending.append(zid)
            omitted.extend(d.id for d in sensors)
    return IdentifiabilityReport(
        ok=not offending,
        offending_zones=tuple(offending),
        omitted_devices=tuple(omitted),
    )

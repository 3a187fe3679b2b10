"""Reading device registries, hourly measurement series, and map stacks.

File formats:
  devices.csv       header ``id,kind,x,y``; kinds ``station`` | ``sensor``
  measurements.csv  header ``device_id,timestamp,value_ugm3``; timestamps are
                    ISO-8601 truncated to the hour (``2017-01-05T06``); an
                    empty value field records a missing slot, never zero
  maps manifest     JSON ``{"fine": path, "coarse": [{"slot": key, "path": p}]}``
                    with paths relative to the manifest's directory
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

from .core_model import Device, Kind, Measurement, TimeSlot
from .errors import (
    DuplicateId,
    DuplicateSlot,
    OutOfExtent,
    OutOfRange,
    ParseError,
    UnknownDevice,
)
from .estimation import Observation
from .mapops import MapStack, combine_initial, read_grid

_KINDS = {"station": Kind.STATION, "sensor": Kind.SENSOR}


@dataclass
class Dataset:
    """Devices plus their hourly series; immutable after loading."""

    devices: dict[str, Device]
    measurements: list[Measurement]
    missing: list[tuple[str, TimeSlot]] = field(default_factory=list)

    def slots(self) -> list[TimeSlot]:
        return sorted({m.slot for m in self.measurements})

    def hours(self) -> tuple[int, ...]:
        return tuple(sorted({m.slot.hour for m in self.measurements}))

    def stations(self) -> list[Device]:
        return sorted((d for d in self.devices.values() if d.kind is Kind.STATION),
                      key=lambda d: d.id)

    def sensors(self) -> list[Device]:
        return sorted((d for d in self.devices.values() if d.kind is Kind.SENSOR),
                      key=lambda d: d.id)

    def without_device(self, device_id: str) -> "Dataset":
        """Copy with one device's measurements removed (LOOCV folds).

        The device stays in the registry so its location remains known; its
        series is simply absent."""
        return Dataset(
            devices=self.devices,
            measurements=[m for m in self.measurements if m.device_id != device_id],
            missing=self.missing,
        )


def load_devices(path) -> list[Device]:
    devices: list[Device] = []
    seen: set[str] = set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["id", "kind", "x", "y"]:
            raise ParseError(f"{path}:1: expected header 'id,kind,x,y'")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise ParseError(f"{path}:{lineno}: expected 4 fields, got {len(row)}")
            dev_id, kind_tok, x_tok, y_tok = (f.strip() for f in row)
            if kind_tok not in _KINDS:
                raise ParseError(f"{path}:{lineno}: unknown kind {kind_tok!r}")
            if dev_id in seen:
                raise DuplicateId(f"{path}:{lineno}: duplicate device id {dev_id!r}")
            try:
                device = Device(id=dev_id, kind=_KINDS[kind_tok],
                                x=float(x_tok), y=float(y_tok))
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from exc
            seen.add(dev_id)
            devices.append(device)
    return devices


def load_measurements(path, registry: dict[str, Device]
                      ) -> tuple[list[Measurement], list[tuple[str, TimeSlot]]]:
    """Returns (measurements, missing slots)."""
    measurements: list[Measurement] = []
    missing: list[tuple[str, TimeSlot]] = []
    seen: set[tuple[str, str]] = set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        expected = ["device_id", "timestamp", "value_ugm3"]
        if header is None or [h.strip() for h in header] != expected:
            raise ParseError(f"{path}:1: expected header 'device_id,timestamp,value_ugm3'")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise ParseError(f"{path}:{lineno}: expected 3 fields, got {len(row)}")
            dev_id, stamp, value_tok = (f.strip() for f in row)
            if dev_id not in registry:
                raise UnknownDevice(f"{path}:{lineno}: unknown device {dev_id!r}")
            try:
                slot = TimeSlot.parse(stamp)
            except (ValueError, TypeError) as exc:
                raise ParseError(f"{path}:{lineno}: bad timestamp {stamp!r}") from exc
            key = (dev_id, slot.key())
            if key in seen:
                raise DuplicateSlot(f"{path}:{lineno}: duplicate slot {key}")
            seen.add(key)
            if value_tok == "":
                missing.append((dev_id, slot))
                continue
            try:
                value = float(value_tok)
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: bad value {value_tok!r}") from exc
            measurements.append(Measurement(device_id=dev_id, slot=slot, value=value))
    return measurements, missing


def load_dataset(devices_path, measurements_path) -> Dataset:
    devices = {d.id: d for d in load_devices(devices_path)}
    measurements, missing = load_measurements(measurements_path, devices)
    return Dataset(devices=devices, measurements=measurements, missing=missing)


def load_map_stack(manifest_path) -> MapStack:
    manifest_path = Path(manifest_path)
    with open(manifest_path, encoding="utf-8") as fh:
        doc = json.load(fh)
    base = manifest_path.parent
    fine = read_grid(base / doc["fine"])
    coarse = {entry["slot"]: read_grid(base / entry["path"])
              for entry in doc["coarse"]}
    return MapStack(fine=fine, coarse=coarse)


def split_periods(dataset: Dataset, learn_until: TimeSlot
                  ) -> tuple[Dataset, Dataset]:
    """Learn view has slots <= learn_until, test view the rest."""
    slots = dataset.slots()
    if not slots:
        raise OutOfRange("dataset has no measurements")
    if not (slots[0] <= learn_until <= slots[-1]):
        raise OutOfRange(
            f"learn_until {learn_until.key()} outside data range "
            f"[{slots[0].key()}, {slots[-1].key()}]"
        )
    learn = [m for m in dataset.measurements if m.slot <= learn_until]
    test = [m for m in dataset.measurements if m.slot > learn_until]
    mk = lambda ms: Dataset(devices=dataset.devices, measurements=ms,
                            missing=dataset.missing)
    return mk(learn), mk(test)


@dataclass
class PtildeTable:
    """Initial-map values sampled at every device for every slot.

    Computed once per map stack and reused across folds and strategies;
    devices outside the grid extent and slots without a coarse map are
    recorded as omissions rather than errors.
    """

    values: dict[tuple[str, str], float]  # (device_id, slot key) -> p_tilde
    omitted_devices: dict[str, str]  # device id -> reason
    skipped_slots: tuple[str, ...]

    def get(self, device_id: str, slot: TimeSlot) -> float | None:
        return self.values.get((device_id, slot.key()))


def sample_initial_at_devices(devices: dict[str, Device], stack: MapStack,
                              slots: list[TimeSlot]) -> PtildeTable:
    omitted: dict[str, str] = {}
    cells: dict[str, tuple[int, int]] = {}
    for dev in devices.values():
        try:
            cells[dev.id] = stack.fine.cell_of(dev.x, dev.y)
        except OutOfExtent:
            omitted[dev.id] = "OutOfExtent"
    values: dict[tuple[str, str], float] = {}
    skipped: list[str] = []
    for slot in slots:
        if slot.key() not in stack.coarse:
            skipped.append(slot.key())
            continue
        grid = combine_initial(stack, slot)
        for dev_id, (row, col) in cells.items():
            v = float(grid.values[row, col])
            if v != grid.nodata:
                values[(dev_id, slot.key())] = v
    return PtildeTable(values=values, omitted_devices=omitted,
                       skipped_slots=tuple(skipped))


def build_observations(dataset: Dataset, ptilde: PtildeTable) -> list[Observation]:
    """Pair each measurement with the initial-map value at its device.

    Measurements for omitted devices or skipped slots are dropped (their
    counts are visible via the PtildeTable)."""
    obs: list[Observation] = []
    for m in dataset.measurements:
        value = ptilde.get(m.device_id, m.slot)
        if value is None:
            continue
        dev = dataset.devices[m.device_id]
        obs.append(Observation(device_id=m.device_id, kind=dev.kind,
                               slot=m.slot, x=m.value, p_tilde=value))
    return obs


def write_devices_csv(devices: list[Device], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "kind", "x", "y"])
        for d in sorted(devices, key=lambda d: d.id):
            writer.writerow([d.id, d.kind.value, repr(d.x), repr(d.y)])


def write_measurements_csv(measurements: list[Measurement], path,
                           missing: list[tuple[str, TimeSlot]] = ()) -> None:
    rows = [(m.device_id, m.slot.key(), repr(m.value)) for m in measurements]
    rows += [(dev_id, slot.key(), "") for dev_id, slot in missing]
    rows.sort()
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["device_id", "timestamp", "value_ugm3"])
        writer.writerows(rows)

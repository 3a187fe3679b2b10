"""Synthetic ground-truth scenes and the independent estimation oracle.

The real Grenoble dataset is proprietary, so verification rests on scenes
generated here: a positive, spatially varying truth field (seeded bumps
times an hour-of-day profile times a per-day factor), a zone-group map
giving each device and grid cell affine bias parameters, and measurement
series drawn from the forward model.  Every random draw flows from the
single scene seed, so equal specs produce byte-identical outputs.

The two deterministic maps are built so their per-cell average reproduces
the biased map: the static fine map is the time-averaged biased map plus a
seeded perturbation, and each slot's second map is chosen so the average
recovers that slot's biased map.  Measurements are drawn consistently with
the map values actually sampled at the device cells, so zero-noise scenes
are exactly recoverable.  ``coarse_factor > 1`` stores the second map on a
genuinely coarser grid for resampling integration tests.
"""

from __future__ import annotations

import datetime as dt
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core_model import Device, Kind, Measurement, TimeSlot
from .errors import InvalidSpec, SingularNormalMatrix
from .ingest import write_devices_csv, write_measurements_csv
from .mapops import GridMap, MapStack, combine_initial, write_grid
from .zoning import ZoningMode, assign_many, build_zones


@dataclass(frozen=True)
class DeviceSpec:
    id: str
    kind: Kind
    x: float
    y: float
    group: str
    alpha: float = 1.0  # sensors only
    beta: float = 0.0


@dataclass(frozen=True)
class GroupSpec:
    C: float
    rho: float


@dataclass
class SceneSpec:
    ncols: int
    nrows: int
    xllcorner: float
    yllcorner: float
    cellsize: float
    devices: list[DeviceSpec]
    groups: dict[str, GroupSpec]
    start_date: dt.date
    n_days: int
    hours: tuple[int, ...]
    sigma: float
    seed: int
    base_level: float = 30.0
    n_bumps: int = 4
    coarse_factor: int = 1
    nodata: float = -9999.0

    def validate(self) -> None:
        if self.sigma < 0:
            raise InvalidSpec("sigma must be nonnegative")
        if self.n_days < 1 or self.ncols < 1 or self.nrows < 1:
            raise InvalidSpec("dimensions must be positive")
        if self.coarse_factor < 1:
            raise InvalidSpec("coarse_factor must be >= 1")
        if not self.devices:
            raise InvalidSpec("no devices")
        ids = [d.id for d in self.devices]
        if len(set(ids)) != len(ids):
            raise InvalidSpec("duplicate device ids")
        for d in self.devices:
            if d.group not in self.groups:
                raise InvalidSpec(f"device {d.id}: unknown group {d.group!r}")
            if abs(1.0 + self.groups[d.group].rho) < 1e-3:
                raise InvalidSpec(f"group {d.group}: rho too close to -1")
        if not self.hours or any(not 0 <= h <= 23 for h in self.hours):
            raise InvalidSpec("hours must be within 0..23")

    def slots(self) -> list[TimeSlot]:
        return [TimeSlot(self.start_date + dt.timedelta(days=d), h)
                for d in range(self.n_days) for h in sorted(self.hours)]

    def core_devices(self) -> dict[str, Device]:
        return {d.id: Device(id=d.id, kind=d.kind, x=d.x, y=d.y)
                for d in self.devices}

    # -- JSON ------------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "grid": {"ncols": self.ncols, "nrows": self.nrows,
                     "xllcorner": self.xllcorner, "yllcorner": self.yllcorner,
                     "cellsize": self.cellsize, "nodata": self.nodata},
            "devices": [{"id": d.id, "kind": d.kind.value, "x": d.x, "y": d.y,
                         "group": d.group, "alpha": d.alpha, "beta": d.beta}
                        for d in self.devices],
            "groups": {g: {"C": s.C, "rho": s.rho} for g, s in self.groups.items()},
            "start_date": self.start_date.isoformat(),
            "n_days": self.n_days,
            "hours": list(self.hours),
            "sigma": self.sigma,
            "seed": self.seed,
            "base_level": self.base_level,
            "n_bumps": self.n_bumps,
            "coarse_factor": self.coarse_factor,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SceneSpec":
        try:
            grid = doc["grid"]
            spec = cls(
                ncols=int(grid["ncols"]), nrows=int(grid["nrows"]),
                xllcorner=float(grid["xllcorner"]),
                yllcorner=float(grid["yllcorner"]),
                cellsize=float(grid["cellsize"]),
                nodata=float(grid.get("nodata", -9999.0)),
                devices=[DeviceSpec(id=d["id"], kind=Kind(d["kind"]),
                                    x=float(d["x"]), y=float(d["y"]),
                                    group=d["group"],
                                    alpha=float(d.get("alpha", 1.0)),
                                    beta=float(d.get("beta", 0.0)))
                         for d in doc["devices"]],
                groups={g: GroupSpec(C=float(s["C"]), rho=float(s["rho"]))
                        for g, s in doc["groups"].items()},
                start_date=dt.date.fromisoformat(doc["start_date"]),
                n_days=int(doc["n_days"]),
                hours=tuple(doc["hours"]),
                sigma=float(doc["sigma"]),
                seed=int(doc["seed"]),
                base_level=float(doc.get("base_level", 30.0)),
                n_bumps=int(doc.get("n_bumps", 4)),
                coarse_factor=int(doc.get("coarse_factor", 1)),
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise InvalidSpec(f"bad scene spec: {exc}") from exc
        spec.validate()
        return spec


HOUR_PROFILE = np.array([1.0 + 0.35 * math.sin(2 * math.pi * (h - 8) / 24.0)
                         for h in range(24)])


@dataclass
class TruthField:
    """Deterministic decomposition P(s, t) = base(s) * hour * day."""

    base: np.ndarray  # fine grid, strictly positive, non-constant
    day_factors: np.ndarray  # one per day, in [0.75, 1.25]

    def slot_multiplier(self, spec: SceneSpec, slot: TimeSlot) -> float:
        day_index = (slot.date - spec.start_date).days
        return float(HOUR_PROFILE[slot.hour] * self.day_factors[day_index])

    def at_slot(self, spec: SceneSpec, slot: TimeSlot) -> np.ndarray:
        return self.base * self.slot_multiplier(spec, slot)


def _bumps(rng: np.random.Generator, spec: SceneSpec, n: int,
           amplitude: float) -> np.ndarray:
    xs = spec.xllcorner + (np.arange(spec.ncols) + 0.5) * spec.cellsize
    ys = (spec.yllcorner + spec.nrows * spec.cellsize
          - (np.arange(spec.nrows) + 0.5) * spec.cellsize)
    width = spec.cellsize * max(spec.ncols, spec.nrows)
    out = np.zeros((spec.nrows, spec.ncols))
    for _ in range(n):
        cx = rng.uniform(xs[0], xs[-1])
        cy = rng.uniform(ys[-1], ys[0])
        amp = rng.uniform(0.3, 1.0) * amplitude
        w = rng.uniform(0.15, 0.5) * width
        d2 = (xs[None, :] - cx) ** 2 + (ys[:, None] - cy) ** 2
        out += amp * np.exp(-d2 / (2.0 * w * w))
    return out


def generate_truth(spec: SceneSpec) -> TruthField:
    """Seeded positive truth field with spatial and day-to-day variation."""
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    base = spec.base_level + _bumps(rng, spec, spec.n_bumps,
                                    amplitude=0.8 * spec.base_level)
    # tilt guarantees non-constancy even with zero bumps
    tilt = np.linspace(0.0, 0.1 * spec.base_level, spec.ncols)
    base = base + tilt[None, :]
    day_factors = rng.uniform(0.75, 1.25, size=spec.n_days)
    return TruthField(base=base, day_factors=day_factors)


@dataclass
class Scene:
    """A fully generated scene, in memory."""

    spec: SceneSpec
    devices: dict[str, Device]
    measurements: list[Measurement]
    stack: MapStack
    truth: TruthField
    group_grid: np.ndarray  # group index per fine cell
    group_names: tuple[str, ...]

    def group_of_device(self, device_id: str) -> str:
        return next(d.group for d in self.spec.devices if d.id == device_id)

    def true_zone_params(self, group: str) -> GroupSpec:
        return self.spec.groups[group]

    def initial_map(self, slot: TimeSlot) -> GridMap:
        return combine_initial(self.stack, slot)

    def true_field(self, slot: TimeSlot) -> np.ndarray:
        """Effective truth: the exact inverse of the bias applied to the
        initial map actually stored in the stack."""
        initial = self.initial_map(slot).values
        names = self.group_names
        c = np.array([self.spec.groups[g].C for g in names])
        den = np.array([1.0 + self.spec.groups[g].rho for g in names])
        return (initial - c[self.group_grid]) / den[self.group_grid]

    def manifest(self) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "truth": {
                "groups": {g: {"C": s.C, "rho": s.rho}
                           for g, s in self.spec.groups.items()},
                "device_groups": {d.id: d.group for d in self.spec.devices},
                "sensors": {d.id: {"alpha": d.alpha, "beta": d.beta}
                            for d in self.spec.devices
                            if d.kind is Kind.SENSOR},
            },
        }


def _group_assignment(spec: SceneSpec) -> tuple[np.ndarray, tuple[str, ...]]:
    """Group index of every fine cell, by the nearest-device rule."""
    devices = [Device(id=d.id, kind=d.kind, x=d.x, y=d.y) for d in spec.devices]
    zoning = build_zones(devices, ZoningMode.ALL_DEVICES)
    xs = spec.xllcorner + (np.arange(spec.ncols) + 0.5) * spec.cellsize
    ys = (spec.yllcorner + spec.nrows * spec.cellsize
          - (np.arange(spec.nrows) + 0.5) * spec.cellsize)
    gx, gy = np.meshgrid(xs, ys)
    zone_ids = assign_many(zoning, gx, gy)
    names = tuple(sorted(spec.groups))
    gidx = {g: i for i, g in enumerate(names)}
    zone_to_group = np.zeros(zoning.K + 1, dtype=np.int64)
    by_id = {d.id: d for d in spec.devices}
    for zone in zoning.zones:
        zone_to_group[zone.id] = gidx[by_id[zone.generator].group]
    return zone_to_group[zone_ids], names


def generate_scene(spec: SceneSpec) -> Scene:
    """Forward-simulate a scene: maps, devices, measurements."""
    spec.validate()
    truth = generate_truth(spec)
    group_grid, names = _group_assignment(spec)
    c = np.array([spec.groups[g].C for g in names])
    den = np.array([1.0 + spec.groups[g].rho for g in names])
    c_grid = c[group_grid]
    den_grid = den[group_grid]

    slots = spec.slots()
    mult_mean = float(np.mean([truth.slot_multiplier(spec, s) for s in slots]))
    ptilde_mean = c_grid + den_grid * (truth.base * mult_mean)

    rng = np.random.default_rng(spec.seed + 1)
    perturb = _bumps(rng, spec, max(2, spec.n_bumps // 2),
                     amplitude=0.15 * spec.base_level)

    geom = dict(xllcorner=spec.xllcorner, yllcorner=spec.yllcorner,
                cellsize=spec.cellsize, nodata=spec.nodata)
    fine = GridMap(ncols=spec.ncols, nrows=spec.nrows,
                   values=ptilde_mean + perturb, **geom)

    factor = spec.coarse_factor
    coarse: dict[str, GridMap] = {}
    for slot in slots:
        ptilde = c_grid + den_grid * truth.at_slot(spec, slot)
        second = 2.0 * ptilde - fine.values
        if factor == 1:
            grid = GridMap(ncols=spec.ncols, nrows=spec.nrows,
                           values=second, **geom)
        else:
            # block-mean onto the coarser geometry; the average of the two
            # maps then only approximates the biased map within a block
            nr = math.ceil(spec.nrows / factor)
            nc = math.ceil(spec.ncols / factor)
            pad = np.full((nr * factor, nc * factor), np.nan)
            pad[:spec.nrows, :spec.ncols] = second
            blocks = np.nanmean(
                pad.reshape(nr, factor, nc, factor).swapaxes(1, 2), axis=(2, 3))
            grid = GridMap(
                ncols=nc, nrows=nr,
                xllcorner=spec.xllcorner,
                yllcorner=spec.yllcorner + spec.nrows * spec.cellsize
                - nr * factor * spec.cellsize,
                cellsize=spec.cellsize * factor,
                nodata=spec.nodata, values=blocks)
        coarse[slot.key()] = grid
    stack = MapStack(fine=fine, coarse=coarse)

    scene = Scene(spec=spec, devices=spec.core_devices(), measurements=[],
                  stack=stack, truth=truth, group_grid=group_grid,
                  group_names=names)

    # measurements drawn consistently with the stored maps: the effective
    # truth at a device is the corrected value of the sampled initial map
    noise_rng = np.random.default_rng(spec.seed + 2)
    dev_specs = sorted(spec.devices, key=lambda d: d.id)
    cells = {d.id: fine.cell_of(d.x, d.y) for d in dev_specs}
    measurements: list[Measurement] = []
    for slot in slots:
        field_truth = scene.true_field(slot)
        for d in dev_specs:
            row, col = cells[d.id]
            p = float(field_truth[row, col])
            noise = float(noise_rng.normal(0.0, spec.sigma)) if spec.sigma > 0 else 0.0
            if d.kind is Kind.STATION:
                value = p + noise
            else:
                value = d.alpha * p + d.beta + noise
            measurements.append(Measurement(device_id=d.id, slot=slot, value=value))
    scene.measurements = measurements
    return scene


def device_observations(scene: Scene):
    """(observations, devices) ready for the estimation module, bypassing
    file round-trips.  The initial-map value at a device is sampled from the
    combined map exactly as ingest would."""
    from .estimation import Observation

    fine = scene.stack.fine
    cells = {d.id: fine.cell_of(d.x, d.y) for d in scene.devices.values()}
    obs = []
    cache: dict[str, np.ndarray] = {}
    for m in scene.measurements:
        key = m.slot.key()
        if key not in cache:
            cache[key] = scene.initial_map(m.slot).values
        row, col = cells[m.device_id]
        dev = scene.devices[m.device_id]
        obs.append(Observation(device_id=m.device_id, kind=dev.kind,
                               slot=m.slot, x=m.value,
                               p_tilde=float(cache[key][row, col])))
    return obs, scene.devices


def write_scene(scene: Scene, out_dir) -> None:
    """Write a scene in the ingest formats plus a manifest with the truth."""
    out = Path(out_dir)
    (out / "maps" / "coarse").mkdir(parents=True, exist_ok=True)
    write_devices_csv(list(scene.devices.values()), out / "devices.csv")
    write_measurements_csv(scene.measurements, out / "measurements.csv")
    write_grid(scene.stack.fine, out / "maps" / "fine.grid")
    entries = []
    for key in sorted(scene.stack.coarse):
        rel = f"coarse/{key}.grid"
        write_grid(scene.stack.coarse[key], out / "maps" / rel)
        entries.append({"slot": key, "path": rel})
    with open(out / "maps" / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump({"fine": "fine.grid", "coarse": entries}, fh, indent=2,
                  sort_keys=True)
        fh.write("\n")
    with open(out / "scene.json", "w", encoding="utf-8") as fh:
        json.dump(scene.manifest(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def oracle_ls(matrix: np.ndarray, response: np.ndarray) -> np.ndarray:
    """Independent least-squares oracle: solve the normal equations
    A^T A theta = A^T X by Gaussian elimination with partial pivoting.

    Deliberately avoids the SVD route used by estimation.solve_ls so the two
    can cross-check each other."""
    a = np.asarray(matrix, dtype=np.float64)
    x = np.asarray(response, dtype=np.float64)
    ata = a.T @ a
    atx = a.T @ x
    n = ata.shape[0]
    aug = np.hstack([ata, atx[:, None]])
    scale = float(np.abs(ata).max()) or 1.0
    for col in range(n):
        pivot_row = col + int(np.argmax(np.abs(aug[col:, col])))
        if abs(aug[pivot_row, col]) < 1e-12 * scale:
            raise SingularNormalMatrix(f"pivot {aug[pivot_row, col]:g} at column {col}")
        if pivot_row != col:
            aug[[col, pivot_row]] = aug[[pivot_row, col]]
        aug[col] = aug[col] / aug[col, col]
        for row in range(n):
            if row != col:
                aug[row] -= aug[row, col] * aug[col]
    return aug[:, -1].copy()

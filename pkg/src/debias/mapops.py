"""Raster grids: ASCII I/O, resampling, initial-map combination, correction.

Grid file format (text, LF line endings): six header lines
``ncols / nrows / xllcorner / yllcorner / cellsize / nodata_value``, then
nrows lines of ncols space-separated decimal values, top row first.
Values are written with shortest round-trip float repr, so a
write -> read cycle is lossless.

Cell convention: a point belongs to the cell with x in [left, right) and
y in (bottom, top]; cells are addressed (row, col) with row 0 at the top.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from . import kernels
from .core_model import ClampCounter, TimeSlot
from .errors import (
    DimensionMismatch,
    ExtentNotCovered,
    MalformedHeader,
    MissingSlot,
    OutOfExtent,
    UnknownHour,
)

if TYPE_CHECKING:  # pragma: no cover
    from .estimation import FittedModel

_HEADER_KEYS = ("ncols", "nrows", "xllcorner", "yllcorner", "cellsize", "nodata_value")


@dataclass
class GridMap:
    """Rectangular concentration raster with a georeference header."""

    ncols: int
    nrows: int
    xllcorner: float
    yllcorner: float
    cellsize: float
    nodata: float
    values: np.ndarray  # (nrows, ncols), row 0 = top

    def __post_init__(self):
        if self.cellsize <= 0:
            raise ValueError("cellsize must be positive")
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (self.nrows, self.ncols):
            raise DimensionMismatch(
                f"values shape {self.values.shape} != ({self.nrows}, {self.ncols})"
            )

    @property
    def xmax(self) -> float:
        return self.xllcorner + self.ncols * self.cellsize

    @property
    def ymax(self) -> float:
        return self.yllcorner + self.nrows * self.cellsize

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        """(x of each column, y of each row), row 0 = top."""
        xs = self.xllcorner + (np.arange(self.ncols) + 0.5) * self.cellsize
        ys = self.ymax - (np.arange(self.nrows) + 0.5) * self.cellsize
        return xs, ys

    def cell_of(self, x: float, y: float) -> tuple[int, int]:
        """(row, col) of the cell containing the point; OutOfExtent otherwise."""
        if not (self.xllcorner <= x < self.xmax and self.yllcorner < y <= self.ymax):
            raise OutOfExtent(f"point ({x:g}, {y:g}) outside grid extent")
        col = int(math.floor((x - self.xllcorner) / self.cellsize))
        # floor((ymax - y)/cs) realizes the (bottom, top] convention: a point
        # on a shared horizontal edge lands in the cell below it
        row = int(math.floor((self.ymax - y) / self.cellsize))
        col = min(col, self.ncols - 1)
        row = min(row, self.nrows - 1)
        return row, col

    def copy_with(self, values: np.ndarray) -> "GridMap":
        return GridMap(self.ncols, self.nrows, self.xllcorner, self.yllcorner,
                       self.cellsize, self.nodata, values)

    def same_geometry(self, other: "GridMap") -> bool:
        return (self.ncols == other.ncols and self.nrows == other.nrows
                and self.xllcorner == other.xllcorner
                and self.yllcorner == other.yllcorner
                and self.cellsize == other.cellsize)


def sample_at(grid: GridMap, x: float, y: float) -> float:
    """Value of the cell containing the point."""
    row, col = grid.cell_of(x, y)
    return float(grid.values[row, col])


def read_grid(path) -> GridMap:
    with open(path, "r", encoding="ascii") as fh:
        header = {}
        for key in _HEADER_KEYS:
            line = fh.readline()
            parts = line.split()
            if len(parts) != 2 or parts[0].lower() != key:
                raise MalformedHeader(f"{path}: expected '{key} <value>', got {line!r}")
            header[key] = parts[1]
        try:
            ncols = int(header["ncols"])
            nrows = int(header["nrows"])
        except ValueError as exc:
            raise MalformedHeader(f"{path}: non-integer dimensions") from exc
        flat = fh.read().split()
    if len(flat) != ncols * nrows:
        raise DimensionMismatch(
            f"{path}: expected {ncols * nrows} values, found {len(flat)}"
        )
    values = np.array(flat, dtype=np.float64).reshape(nrows, ncols)
    return GridMap(
        ncols=ncols,
        nrows=nrows,
        xllcorner=float(header["xllcorner"]),
        yllcorner=float(header["yllcorner"]),
        cellsize=float(header["cellsize"]),
        nodata=float(header["nodata_value"]),
        values=values,
    )


def write_grid(grid: GridMap, path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(f"ncols {grid.ncols}\n")
        fh.write(f"nrows {grid.nrows}\n")
        fh.write(f"xllcorner {grid.xllcorner!r}\n")
        fh.write(f"yllcorner {grid.yllcorner!r}\n")
        fh.write(f"cellsize {grid.cellsize!r}\n")
        fh.write(f"nodata_value {grid.nodata!r}\n")
        for row in grid.values:
            fh.write(" ".join(repr(float(v)) for v in row))
            fh.write("\n")


def resample_nearest(coarse: GridMap, template: GridMap) -> GridMap:
    """Evaluate a coarse grid on a template grid's geometry.

    Each template cell takes the value of the coarse cell containing its
    center (nearest-neighbor, preserving piecewise-constant semantics).
    """
    xs, ys = template.cell_centers()
    if not (coarse.xllcorner <= xs[0] and xs[-1] < coarse.xmax
            and coarse.yllcorner < ys[-1] and ys[0] <= coarse.ymax):
        raise ExtentNotCovered("template cell centers fall outside the coarse grid")
    cols = np.floor((xs - coarse.xllcorner) / coarse.cellsize).astype(int)
    rows = np.floor((coarse.ymax - ys) / coarse.cellsize).astype(int)
    cols = np.clip(cols, 0, coarse.ncols - 1)
    rows = np.clip(rows, 0, coarse.nrows - 1)
    values = coarse.values[np.ix_(rows, cols)]
    values = np.where(values == coarse.nodata, template.nodata, values)
    return template.copy_with(values)


@dataclass
class MapStack:
    """Static fine map plus per-slot coarse maps on a shared CRS."""

    fine: GridMap
    coarse: dict[str, GridMap]  # slot key -> grid

    def coarse_for(self, slot: TimeSlot) -> GridMap:
        try:
            return self.coarse[slot.key()]
        except KeyError:
            raise MissingSlot(f"no coarse map for slot {slot.key()}") from None


def combine_initial(stack: MapStack, slot: TimeSlot) -> GridMap:
    """Initial deterministic map: per-cell average of the static fine map
    and the slot's coarse map resampled to the fine geometry.  Nodata in
    either input yields nodata."""
    coarse = resample_nearest(stack.coarse_for(slot), stack.fine)
    fine = stack.fine
    values = 0.5 * (fine.values + coarse.values)
    nodata_mask = (fine.values == fine.nodata) | (coarse.values == fine.nodata)
    values = np.where(nodata_mask, fine.nodata, values)
    return fine.copy_with(values)


def correct_map(
    initial: GridMap,
    model: "FittedModel",
    hour: int | None,
    clamp: bool = False,
) -> tuple[GridMap, dict[int, int]]:
    """Correct every cell with the parameters of its Voronoi zone.

    Degenerate zones apply the identity.  Returns the corrected grid and
    per-zone clamp counts (empty when nothing was clamped).
    """
    zoning = model.zoning
    if not model.has_hour(hour):
        raise UnknownHour(f"model not fitted for hour {hour!r}")
    gx, gy, zone_ids = zoning.sorted_arrays()
    xs, ys = initial.cell_centers()
    zidx = kernels.nearest_zone_grid(xs, ys, gx, gy)
    c_arr = np.empty(len(zone_ids))
    inv_den = np.empty(len(zone_ids))
    for i, zid in enumerate(zone_ids):
        zp = model.zone_params(int(zid), hour)
        c_arr[i] = zp.C
        inv_den[i] = 1.0 / (1.0 + zp.rho)
    out, counts = kernels.affine_correct_grid(
        initial.values, zidx, c_arr, inv_den, initial.nodata, clamp
    )
    clamp_counts = {
        int(zone_ids[i]): int(c) for i, c in enumerate(counts) if c > 0
    }
    return initial.copy_with(out), clamp_counts


def correct_at_point(model: "FittedModel", hour: int | None, x: float, y: float,
                     p_tilde: float, clamp: bool = False,
                     counter: ClampCounter | None = None) -> float:
    """Single-point correction using the zone of (x, y)."""
    from . import zoning as zoning_mod
    from .core_model import correct

    zid = zoning_mod.assign(model.zoning, x, y)
    zp = model.zone_params(zid, hour)
    return correct(zp, p_tilde, clamp=clamp, counter=counter, zone_id=zid)

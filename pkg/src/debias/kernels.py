"""Hot per-cell kernels for grid correction.

Two interchangeable backends: numba @njit loops (default) and pure numpy.
Set DEBIAS_NUMBA=0 to force the numpy path.  Both backends perform the
same elementwise arithmetic in the same order, so their outputs are
bit-identical; `benchmarks/bench_kernels.py` compares their speed.
"""

from __future__ import annotations

import os

import numpy as np

_flag = os.environ.get("DEBIAS_NUMBA", "1").strip().lower()
USE_NUMBA = _flag not in ("0", "false", "off", "no")

if USE_NUMBA:
    try:
        from numba import njit, prange
    except ImportError:  # pragma: no cover
        USE_NUMBA = False


def _nearest_zone_grid_np(cell_x, cell_y, gen_x, gen_y):
    d2 = (cell_x[None, :] - gen_x[:, None]) ** 2
    d2 = d2[:, None, :] + ((cell_y[None, :] - gen_y[:, None]) ** 2)[:, :, None]
    # axis0 = generator (id-sorted), so argmin ties resolve to smallest id
    return np.argmin(d2, axis=0).astype(np.int64)


def _affine_correct_grid_np(values, zidx, c_arr, inv_den, nodata, clamp):
    out = (values - c_arr[zidx]) * inv_den[zidx]
    mask_nodata = values == nodata
    neg = (out < 0.0) & ~mask_nodata
    counts = np.bincount(zidx[neg & clamp].ravel(), minlength=len(c_arr)) if clamp else (
        np.zeros(len(c_arr), dtype=np.int64)
    )
    if clamp:
        out = np.where(neg, 0.0, out)
    out = np.where(mask_nodata, nodata, out)
    return out, counts.astype(np.int64)


if USE_NUMBA:

    @njit(cache=True, parallel=True)
    def _nearest_zone_grid_nb(cell_x, cell_y, gen_x, gen_y):  # pragma: no cover
        nrows = cell_y.shape[0]
        ncols = cell_x.shape[0]
        ngen = gen_x.shape[0]
        out = np.empty((nrows, ncols), dtype=np.int64)
        for i in prange(nrows):
            for j in range(ncols):
                best = 0
                bd = (cell_x[j] - gen_x[0]) ** 2 + (cell_y[i] - gen_y[0]) ** 2
                for g in range(1, ngen):
                    d = (cell_x[j] - gen_x[g]) ** 2 + (cell_y[i] - gen_y[g]) ** 2
                    if d < bd:  # strict: first (= smallest id) wins ties
                        bd = d
                        best = g
                out[i, j] = best
        return out

    @njit(cache=True)
    def _affine_correct_grid_nb(values, zidx, c_arr, inv_den, nodata, clamp):  # pragma: no cover
        nrows, ncols = values.shape
        out = np.empty_like(values)
        counts = np.zeros(c_arr.shape[0], dtype=np.int64)
        for i in range(nrows):
            for j in range(ncols):
                v = values[i, j]
                if v == nodata:
                    out[i, j] = nodata
                    continue
                k = zidx[i, j]
                r = (v - c_arr[k]) * inv_den[k]
                if clamp and r < 0.0:
                    counts[k] += 1
                    r = 0.0
                out[i, j] = r
        return out, counts


def nearest_zone_grid(cell_x: np.ndarray, cell_y: np.ndarray,
                      gen_x: np.ndarray, gen_y: np.ndarray) -> np.ndarray:
    """Index (into the id-sorted generator arrays) of the nearest generator
    for every (row, col) cell center."""
    cell_x = np.ascontiguousarray(cell_x, dtype=np.float64)
    cell_y = np.ascontiguousarray(cell_y, dtype=np.float64)
    gen_x = np.ascontiguousarray(gen_x, dtype=np.float64)
    gen_y = np.ascontiguousarray(gen_y, dtype=np.float64)
    if USE_NUMBA:
        return _nearest_zone_grid_nb(cell_x, cell_y, gen_x, gen_y)
    return _nearest_zone_grid_np(cell_x, cell_y, gen_x, gen_y)


def affine_correct_grid(values: np.ndarray, zidx: np.ndarray, c_arr: np.ndarray,
                        inv_den: np.ndarray, nodata: float, clamp: bool):
    """Apply per-zone (v - C) / (1 + rho) to a grid.

    ``inv_den`` carries precomputed 1/(1+rho) per zone index.  Returns the
    corrected grid and per-zone-index clamp counts.  Nodata cells propagate.
    """
    values = np.ascontiguousarray(values, dtype=np.float64)
    zidx = np.ascontiguousarray(zidx, dtype=np.int64)
    c_arr = np.ascontiguousarray(c_arr, dtype=np.float64)
    inv_den = np.ascontiguousarray(inv_den, dtype=np.float64)
    if USE_NUMBA:
        return _affine_correct_grid_nb(values, zidx, c_arr, inv_den, float(nodata), clamp)
    return _affine_correct_grid_np(values, zidx, c_arr, inv_den, float(nodata), clamp)

import os
import subprocess
import sys

import numpy as np
import pytest

from debias import kernels


def random_problem(seed, nrows=37, ncols=53, ngen=7):
    rng = np.random.default_rng(seed)
    cell_x = np.sort(rng.uniform(-100, 100, size=ncols))
    cell_y = np.sort(rng.uniform(-100, 100, size=nrows))[::-1].copy()
    gen_x = rng.uniform(-100, 100, size=ngen)
    gen_y = rng.uniform(-100, 100, size=ngen)
    values = rng.uniform(-5, 80, size=(nrows, ncols))
    c_arr = rng.uniform(-10, 10, size=ngen)
    inv_den = 1.0 / (1.0 + rng.uniform(-0.5, 2.0, size=ngen))
    return cell_x, cell_y, gen_x, gen_y, values, c_arr, inv_den


def test_nearest_zone_grid_brute_force():
    cell_x, cell_y, gen_x, gen_y, *_ = random_problem(1)
    zidx = kernels.nearest_zone_grid(cell_x, cell_y, gen_x, gen_y)
    for i in range(len(cell_y)):
        for j in range(len(cell_x)):
            d2 = (cell_x[j] - gen_x) ** 2 + (cell_y[i] - gen_y) ** 2
            assert zidx[i, j] == int(np.argmin(d2))


def test_nearest_zone_grid_tie_prefers_first_index():
    # two generators equidistant from the single cell: index 0 wins
    zidx = kernels.nearest_zone_grid(np.array([0.0]), np.array([0.0]),
                                     np.array([-1.0, 1.0]), np.array([0.0, 0.0]))
    assert zidx[0, 0] == 0


def test_affine_correct_values():
    values = np.array([[10.0, -9999.0], [4.0, 0.0]])
    zidx = np.array([[0, 0], [1, 1]])
    out, counts = kernels.affine_correct_grid(
        values, zidx, np.array([5.0, -3.0]), np.array([1.0 / 1.4, 1.0 / 0.75]),
        -9999.0, False)
    np.testing.assert_allclose(out, [[5.0 / 1.4, -9999.0],
                                     [7.0 / 0.75, 3.0 / 0.75]])
    assert list(counts) == [0, 0]


def test_affine_correct_clamp_counts():
    values = np.array([[1.0, 2.0, 50.0]])
    zidx = np.array([[0, 0, 1]])
    out, counts = kernels.affine_correct_grid(
        values, zidx, np.array([5.0, 0.0]), np.array([1.0, 1.0]), -9999.0, True)
    np.testing.assert_array_equal(out, [[0.0, 0.0, 50.0]])
    assert list(counts) == [2, 0]


def test_affine_correct_nodata_never_clamped():
    values = np.array([[-9999.0]])
    zidx = np.array([[0]])
    out, counts = kernels.affine_correct_grid(
        values, zidx, np.array([5.0]), np.array([1.0]), -9999.0, True)
    assert out[0, 0] == -9999.0 and counts[0] == 0


@pytest.mark.skipif(not kernels.USE_NUMBA, reason="numba backend disabled")
def test_backends_bit_identical_in_process():
    for seed in range(5):
        cell_x, cell_y, gen_x, gen_y, values, c_arr, inv_den = random_problem(seed)
        z_nb = kernels._nearest_zone_grid_nb(cell_x, cell_y, gen_x, gen_y)
        z_np = kernels._nearest_zone_grid_np(cell_x, cell_y, gen_x, gen_y)
        np.testing.assert_array_equal(z_nb, z_np)
        for clamp in (False, True):
            o_nb, c_nb = kernels._affine_correct_grid_nb(
                values, z_nb, c_arr, inv_den, -9999.0, clamp)
            o_np, c_np = kernels._affine_correct_grid_np(
                values, z_np, c_arr, inv_den, -9999.0, clamp)
            assert np.array_equal(o_nb, o_np)  # bit exact
            np.testing.assert_array_equal(c_nb, c_np)


SUBPROC_SNIPPET = """
import numpy as np
from debias import kernels
rng = np.random.default_rng(404)
cell_x = np.sort(rng.uniform(-100, 100, size=53))
cell_y = np.sort(rng.uniform(-100, 100, size=37))[::-1].copy()
gen_x = rng.uniform(-100, 100, size=7)
gen_y = rng.uniform(-100, 100, size=7)
values = rng.uniform(-5, 80, size=(37, 53))
c_arr = rng.uniform(-10, 10, size=7)
inv_den = 1.0 / (1.0 + rng.uniform(-0.5, 2.0, size=7))
zidx = kernels.nearest_zone_grid(cell_x, cell_y, gen_x, gen_y)
out, counts = kernels.affine_correct_grid(values, zidx, c_arr, inv_den, -9999.0, True)
print(kernels.USE_NUMBA)
print(zidx.tobytes().hex())
print(out.tobytes().hex())
print(counts.tobytes().hex())
"""


def test_env_flag_selects_backend_and_outputs_match():
    results = {}
    for flag in ("1", "0"):
        env = dict(os.environ, DEBIAS_NUMBA=flag)
        proc = subprocess.run([sys.executable, "-c", SUBPROC_SNIPPET],
                              capture_output=True, text=True, env=env)
        assert proc.returncode == 0, proc.stderr
        lines = proc.stdout.strip().splitlines()
        results[flag] = lines
    assert results["0"][0] == "False"
    # with numba installed the default flag enables it
    assert results["1"][0] == "True"
    assert results["1"][1:] == results["0"][1:]

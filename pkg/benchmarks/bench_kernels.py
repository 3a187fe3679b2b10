"""Compare the numba and numpy kernel backends.

Run:  python3 benchmarks/bench_kernels.py [--size 1200] [--zones 25]

Prints per-kernel wall times for both backends plus the speedup, and
verifies the outputs are bit-identical before timing.
"""

import argparse
import time

import numpy as np

from debias import kernels


def time_fn(fn, *args, repeat=5):
    fn(*args)  # warm-up (jit compile, cache touch)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--size", type=int, default=1200,
                        help="grid side length (cells)")
    parser.add_argument("--zones", type=int, default=25)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    if not kernels.USE_NUMBA:
        raise SystemExit("numba backend disabled (DEBIAS_NUMBA=0); "
                         "nothing to compare")

    rng = np.random.default_rng(0)
    n = args.size
    cell_x = np.linspace(-100.0, 100.0, n)
    cell_y = np.linspace(100.0, -100.0, n)
    gen_x = rng.uniform(-100, 100, size=args.zones)
    gen_y = rng.uniform(-100, 100, size=args.zones)
    values = rng.uniform(-5, 80, size=(n, n))
    c_arr = rng.uniform(-10, 10, size=args.zones)
    inv_den = 1.0 / (1.0 + rng.uniform(-0.5, 2.0, size=args.zones))

    z_nb = kernels._nearest_zone_grid_nb(cell_x, cell_y, gen_x, gen_y)
    z_np = kernels._nearest_zone_grid_np(cell_x, cell_y, gen_x, gen_y)
    o_nb, k_nb = kernels._affine_correct_grid_nb(values, z_nb, c_arr, inv_den,
                                                 -9999.0, True)
    o_np, k_np = kernels._affine_correct_grid_np(values, z_np, c_arr, inv_den,
                                                 -9999.0, True)
    assert np.array_equal(z_nb, z_np), "zone indices differ between backends"
    assert np.array_equal(o_nb, o_np), "corrected grids differ between backends"
    assert np.array_equal(k_nb, k_np), "clamp counts differ between backends"
    print(f"backends agree bit-for-bit on a {n}x{n} grid, {args.zones} zones\n")

    rows = [
        ("nearest_zone_grid",
         time_fn(kernels._nearest_zone_grid_nb, cell_x, cell_y, gen_x, gen_y,
                 repeat=args.repeat),
         time_fn(kernels._nearest_zone_grid_np, cell_x, cell_y, gen_x, gen_y,
                 repeat=args.repeat)),
        ("affine_correct_grid",
         time_fn(kernels._affine_correct_grid_nb, values, z_nb, c_arr, inv_den,
                 -9999.0, True, repeat=args.repeat),
         time_fn(kernels._affine_correct_grid_np, values, z_np, c_arr, inv_den,
                 -9999.0, True, repeat=args.repeat)),
    ]
    print(f"{'kernel':<22} {'numba (ms)':>12} {'numpy (ms)':>12} {'speedup':>9}")
    for name, t_nb, t_np in rows:
        print(f"{name:<22} {t_nb * 1e3:>12.2f} {t_np * 1e3:>12.2f} "
              f"{t_np / t_nb:>8.1f}x")


if __name__ == "__main__":
    main()

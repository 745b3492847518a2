"""Timing comparison of the compiled stepping kernel vs the NumPy fallback.

Both backends implement the identical update with the identical floating
point expression grouping, so before timing anything the script asserts
bitwise agreement of the produced trajectories.  Throughput is reported
in node updates per second (paths x time levels x interior nodes).

Run:  python3 benchmarks/kernel_benchmark.py [--paths P] [--M M] [--N N]
"""

import argparse
import time

import numpy as np

from stochwave import _stepper_np
from stochwave.fields import random_field, random_slice
from stochwave.grids import build_grid
from stochwave.solver import (
    ProblemData,
    SchemeCoefficients,
    _init_slices,
    _prepare_arrays,
    path_seed,
    sample_brownian,
)

try:
    from stochwave import _stepper as _ext
except ImportError:
    _ext = None


def build_inputs(M, N, T, paths, seed=1234):
    grid = build_grid(M, N, T)
    data = ProblemData(
        y0=random_slice(grid, 1, 1.0),
        y1=random_slice(grid, 2, 0.5),
        g=random_field(grid, 3, 0.8),
        f=random_field(grid, 4, 0.3),
    )
    coeffs = SchemeCoefficients.constant(grid, a=-0.4, b=0.2, c=0.3, d=0.6)
    A, B, C, D, G, F = _prepare_arrays(data, coeffs, grid)
    dB = np.stack(
        [
            sample_brownian(N, grid.dt, path_seed(seed, k)).increments
            for k in range(paths)
        ]
    )
    Y = np.zeros((paths, N + 2, M + 2))
    _init_slices(Y, data, grid)
    return grid, (A, B, C, D, G, F), dB, Y


def time_backend(step, arrs, dB, Y0, dt, dx, repeats):
    best = float("inf")
    out = None
    for _ in range(repeats):
        Y = Y0.copy()
        t0 = time.perf_counter()
        flag = step(Y, *arrs, dB, dt, dx)
        best = min(best, time.perf_counter() - t0)
        out = (flag, Y)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--paths", type=int, default=64)
    ap.add_argument("--M", type=int, default=127)
    ap.add_argument("--N", type=int, default=2048)
    ap.add_argument("--T", type=float, default=1.0)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    grid, arrs, dB, Y0 = build_inputs(args.M, args.N, args.T, args.paths)
    updates = args.paths * args.N * args.M

    t_np, (flag_np, Y_np) = time_backend(
        _stepper_np.step_paths, arrs, dB, Y0, grid.dt, grid.dx, args.repeats
    )
    print(f"numpy : {t_np*1e3:9.2f} ms   {updates/t_np/1e6:8.1f} Mupd/s")

    if _ext is None:
        print("cython: extension not built (pip install -e . compiles it)")
        return

    t_cy, (flag_cy, Y_cy) = time_backend(
        _ext.step_paths, arrs, dB, Y0, grid.dt, grid.dx, args.repeats
    )
    print(f"cython: {t_cy*1e3:9.2f} ms   {updates/t_cy/1e6:8.1f} Mupd/s")
    print(f"speedup: {t_np/t_cy:.2f}x")

    same = flag_np == flag_cy and np.array_equal(Y_np, Y_cy)
    print(f"bitwise agreement: {'yes' if same else 'NO'}")
    if not same:
        raise SystemExit(1)


if __name__ == "__main__":
    main()

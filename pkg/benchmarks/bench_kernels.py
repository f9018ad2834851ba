#!/usr/bin/env python3
"""Benchmark the fused evolution kernels: numba path vs pure-numpy fallback.

Times the right-hand-side evaluation on smooth random fields and a short RK4
run, for 1D and 2D grids.  The same comparison can be forced at runtime with
DGSYM_BACKEND=numpy|numba.

    python3 benchmarks/bench_kernels.py [--repeats 50]
"""

import argparse
import time

import numpy as np

from dgsym import kernels
from dgsym.fields import Grid, LogPolarField
from dgsym.params import reference_points
from dgsym.pde import dg_rhs, evolve, rhs_coefficients


def smooth_field(grid, seed=0):
    rng = np.random.default_rng(seed)
    if grid.n == 1:
        x = grid.coords()[0]
        r = 0.3 * np.sin(2 * np.pi * x / 4) + 0.05 * rng.standard_normal(grid.shape)
        s = 0.2 * np.cos(2 * np.pi * x / 4) + 0.05 * rng.standard_normal(grid.shape)
    else:
        x, y = grid.coords()
        r = 0.3 * np.sin(x) * np.cos(y) + 0.02 * rng.standard_normal(grid.shape)
        s = 0.2 * np.cos(x) * np.sin(y) + 0.02 * rng.standard_normal(grid.shape)
    return LogPolarField(grid, 0.0, r, s)


def time_rhs(p, field, repeats):
    coeffs = rhs_coefficients(p)
    kernels.evolution_rhs(field.r, field.s, field.grid, coeffs)  # warm up / jit
    t0 = time.perf_counter()
    for _ in range(repeats):
        kernels.evolution_rhs(field.r, field.s, field.grid, coeffs)
    return (time.perf_counter() - t0) / repeats


def time_evolve(p, field, steps):
    evolve(p, field, 2)  # warm up
    t0 = time.perf_counter()
    evolve(p, field, steps)
    return time.perf_counter() - t0


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=50)
    args = ap.parse_args()

    p = reference_points()["sym1b-nu2"]
    p2 = reference_points(2)["sym1b-nu2"]
    cases = [
        ("1D N=1024", Grid.make(n=1, npts=1024, extent=(-8, 8), bc="periodic"), p, 400),
        ("1D N=8192", Grid.make(n=1, npts=8192, extent=(-8, 8), bc="periodic"), p, 100),
        ("2D 128^2 ", Grid.make(n=2, npts=128, extent=(-8, 8), bc="periodic"), p2, 100),
        ("2D 256^2 ", Grid.make(n=2, npts=256, extent=(-8, 8), bc="periodic"), p2, 25),
    ]

    backends = ["numpy"]
    if kernels.HAVE_NUMBA:
        backends.append("numba")
    else:
        print("numba not importable; timing the numpy path only")

    print(f"{'case':10s} {'op':8s} " + " ".join(f"{b:>12s}" for b in backends)
          + ("      speedup" if len(backends) == 2 else ""))
    for label, grid, params, steps in cases:
        field = smooth_field(grid)
        row_rhs, row_ev = [], []
        for backend in backends:
            kernels.set_backend(backend)
            row_rhs.append(time_rhs(params, field, args.repeats))
            row_ev.append(time_evolve(params, field, steps))
        kernels.set_backend(None)

        def fmt(times):
            return " ".join(f"{t * 1e6:10.1f}us" for t in times)

        tail = f"   {row_rhs[0] / row_rhs[1]:8.2f}x" if len(backends) == 2 else ""
        print(f"{label:10s} {'rhs':8s} {fmt(row_rhs)}{tail}")
        tail = f"   {row_ev[0] / row_ev[1]:8.2f}x" if len(backends) == 2 else ""
        print(f"{label:10s} {'rk4x' + str(steps):8s} {fmt(row_ev)}{tail}")


if __name__ == "__main__":
    main()

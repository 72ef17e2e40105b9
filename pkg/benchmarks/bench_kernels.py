"""Compiled versus interpreted kernels.

Usage::

    python benchmarks/bench_kernels.py [--repeat 5]

Times the tridiagonal solve, one five-point operator application and a full
conjugate-gradient solve with each backend and prints the speed-up.
"""
import argparse
import timeit

import numpy as np

from fvcorrect import linalg
from fvcorrect.fv2d import assemble_2d, cell_integrals_2d
from fvcorrect.mesh import build_cell_centered, build_mesh2d
from fvcorrect.model import get_problem


def cases():
    rng = np.random.default_rng(0)
    for n in (10_000, 100_000):
        sub = -rng.uniform(0.5, 1.0, n - 1)
        sup = -rng.uniform(0.5, 1.0, n - 1)
        diag = 2.5 + rng.uniform(0, 1, n)
        rhs = rng.normal(size=n)
        yield f"thomas n={n}", lambda k, a=(sub, diag, sup, rhs): k.thomas(*a)

    mesh = build_mesh2d(build_cell_centered(150), build_cell_centered(150))
    op = assemble_2d(mesh)
    x = rng.normal(size=op.shape)
    out = np.empty_like(x)
    arrays = (op.center, op.west, op.east, op.south, op.north)
    yield f"five_point_apply {op.shape[0]}x{op.shape[1]}", \
        lambda k: k.five_point_apply(*arrays, x, out)

    small = build_mesh2d(build_cell_centered(40), build_cell_centered(40))
    small_op = assemble_2d(small)
    b = cell_integrals_2d(get_problem("test2-2d").f, small)

    def cg(k):
        saved = linalg._kernels
        linalg._kernels = k
        try:
            linalg.cg_solve(small_op, b)
        finally:
            linalg._kernels = saved

    yield f"cg_solve {small_op.shape[0]}x{small_op.shape[1]}", cg


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    try:
        compiled = linalg.get_kernels("compiled")
    except ImportError:
        raise SystemExit("compiled kernels are not built; reinstall with Cython available")
    python = linalg.get_kernels("python")
    print(f"{'case':<30} {'compiled [ms]':>14} {'python [ms]':>12} {'speed-up':>9}")
    for name, fn in cases():
        t = {}
        for label, k in (("compiled", compiled), ("python", python)):
            fn(k)
            t[label] = min(timeit.repeat(lambda: fn(k), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:<30} {t['compiled']:>14.3f} {t['python']:>12.3f} "
              f"{t['python'] / t['compiled']:>8.1f}x")


if __name__ == "__main__":
    main()

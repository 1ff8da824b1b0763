"""Benchmark the numba kernels against the pure-Python fallback.

Usage: python3 bench/bench_kernels.py [--sizes 16,32,64] [--repeat 3]

Times masked single-source Dijkstra and connected components on triangulated
grids for both backends and prints the speedup. The fallback can also be
forced package-wide with PLANROUTE_KERNELS=python.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from planroute import kernels
from planroute.graph import generate_triangulated_grid


def time_call(fn, *args, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="16,32,64")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    if not kernels.HAS_NUMBA:
        print("numba unavailable; only the python backend can run")
        return

    print(f"{'n':>8} {'kernel':>10} {'python':>12} {'numba':>12} {'speedup':>9}")
    for side in sizes:
        g = generate_triangulated_grid(side, side, "uniform:1:8", seed=1)
        mask = np.ones(g.n, dtype=np.uint8)
        src_v = np.array([0], dtype=np.int32)
        src_d = np.array([0], dtype=np.int64)
        # warm the jit cache before timing
        kernels._dijkstra_nb(g.indptr, g.nbr, g.nbr_w, src_v, src_d, mask,
                             np.int64(-1))
        kernels._cc_nb(g.indptr, g.nbr, mask)

        t_py = time_call(kernels._dijkstra_py, g.indptr, g.nbr, g.nbr_w,
                         src_v, src_d, mask, -1, repeat=args.repeat)
        t_nb = time_call(kernels._dijkstra_nb, g.indptr, g.nbr, g.nbr_w,
                         src_v, src_d, mask, np.int64(-1), repeat=args.repeat)
        print(f"{g.n:>8} {'dijkstra':>10} {t_py * 1e3:>10.2f}ms {t_nb * 1e3:>10.2f}ms "
              f"{t_py / t_nb:>8.1f}x")

        t_py = time_call(kernels._cc_py, g.indptr, g.nbr, mask, repeat=args.repeat)
        t_nb = time_call(kernels._cc_nb, g.indptr, g.nbr, mask, repeat=args.repeat)
        print(f"{g.n:>8} {'components':>10} {t_py * 1e3:>10.2f}ms {t_nb * 1e3:>10.2f}ms "
              f"{t_py / t_nb:>8.1f}x")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-numpy fallback.

Times the two hot paths on realistic workloads: nearest-point distances
between dense foreground sets (the boundary-metric inner loop) and the
fuse-threshold-count pass (the grid-search inner loop). Run after
building the extension:

    python benchmarks/bench_kernels.py
    python benchmarks/bench_kernels.py --side 512 --points 20000 --vectors 286
"""

import argparse
import time

import numpy as np

from segfuse._kernels import load_backend


def _time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_min_distances(mod, rng, n_points, repeats):
    src = np.ascontiguousarray(rng.integers(0, 512, size=(n_points, 2)).astype(np.float64))
    dst = np.ascontiguousarray(rng.integers(0, 512, size=(n_points, 2)).astype(np.float64))
    return _time(lambda: mod.min_distances(src, dst), repeats)


def bench_grid_pass(mod, rng, side, n_vectors, repeats):
    stack = np.ascontiguousarray(rng.random((4, side, side)).astype(np.float32))
    truth = np.ascontiguousarray((rng.random((side, side)) < 0.3).view(np.uint8))
    vectors = []
    while len(vectors) < n_vectors:
        nums = rng.multinomial(10, [0.25] * 4).astype(np.int64)
        vectors.append(nums)

    def run():
        for nums in vectors:
            mod.fused_counts(stack, nums, 10, 0.5, truth)

    return _time(run, repeats)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--points", type=int, default=8000, help="foreground points per set")
    parser.add_argument("--side", type=int, default=256, help="raster side for the grid pass")
    parser.add_argument("--vectors", type=int, default=64, help="weight vectors in the grid pass")
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    backends = [load_backend("python")]
    try:
        backends.append(load_backend("native"))
    except ImportError:
        print("compiled kernels not built; benchmarking the fallback only")

    rows = []
    for mod, name in backends:
        rng = np.random.default_rng(1)
        t_dist = bench_min_distances(mod, rng, args.points, args.repeats)
        t_grid = bench_grid_pass(mod, rng, args.side, args.vectors, args.repeats)
        rows.append((name, t_dist, t_grid))

    print(f"\nworkloads: {args.points}x{args.points} point distances | "
          f"{args.vectors} weight vectors on 4x{args.side}x{args.side}")
    print(f"{'backend':<10} {'min_distances':>15} {'grid pass':>15}")
    for name, t_dist, t_grid in rows:
        print(f"{name:<10} {t_dist:>13.4f}s {t_grid:>13.4f}s")
    if len(rows) == 2:
        print(
            f"{'speedup':<10} {rows[0][1] / rows[1][1]:>14.1f}x {rows[0][2] / rows[1][2]:>14.1f}x"
        )


if __name__ == "__main__":
    main()

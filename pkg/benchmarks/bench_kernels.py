#!/usr/bin/env python3
"""Benchmark the numba kernel backend against the pure-numpy fallback.

Runs every kernel on a large input with both backends and prints a timing
table. Numba compilation happens during warmup and is excluded.

Usage:
    python benchmarks/bench_kernels.py [--repeat N] [--scale FACTOR]
"""

import argparse
import time

import numpy as np

from longtail.kernels import as_seed
from longtail.kernels import numpy_backend

try:
    from longtail.kernels import numba_backend
except ImportError:
    numba_backend = None


def time_best(fn, args, repeat):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def build_cases(scale):
    rng = np.random.default_rng(0)
    seed = as_seed(42)

    n_stream = int(2_000_000 * scale)
    n_perm = int(1_000_000 * scale)

    n_cas = int(1_000_000 * scale)
    counts = np.array([4000, 2000, 1000, 500, 250, 200])
    offsets = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    members = np.arange(offsets[-1], dtype=np.int64)

    factors = rng.uniform(1.0, 3.0, int(200_000 * scale))

    n_img = int(5_000 * scale)
    n_det = int(50_000 * scale)
    n_gt = int(20_000 * scale)

    def corner_rows(k):
        c = rng.uniform(0.2, 0.8, (k, 2))
        w = rng.uniform(0.05, 0.3, (k, 2))
        return np.hstack([c - w / 2, c + w / 2])

    det_img = np.sort(rng.integers(0, n_img, n_det)).astype(np.int64)
    det_boxes = corner_rows(n_det)
    gt_counts = np.bincount(rng.integers(0, n_img, n_gt), minlength=n_img)
    gt_offsets = np.concatenate([[0], np.cumsum(gt_counts)]).astype(np.int64)
    gt_boxes = corner_rows(n_gt)

    n_iou = int(2_000_000 * scale)
    pairs_a = corner_rows(n_iou)
    pairs_b = corner_rows(n_iou)

    return [
        ("splitmix64_stream", (seed, n_stream)),
        ("permutation", (seed, n_perm)),
        ("cas_slots", (seed, n_cas, offsets, members)),
        ("rfs_replicate", (seed, factors, False)),
        ("match_greedy", (det_img, det_boxes, gt_offsets, gt_boxes, 0.5)),
        ("iou_pairs", (pairs_a, pairs_b)),
    ]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--scale", type=float, default=1.0,
                        help="shrink or grow every workload")
    args = parser.parse_args()

    cases = build_cases(args.scale)
    header = f"{'kernel':<20} {'numpy (s)':>12} {'numba (s)':>12} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for name, case_args in cases:
        np_fn = getattr(numpy_backend, name)
        t_np = time_best(np_fn, case_args, args.repeat)
        if numba_backend is None:
            print(f"{name:<20} {t_np:>12.4f} {'n/a':>12} {'n/a':>9}")
            continue
        nb_fn = getattr(numba_backend, name)
        nb_fn(*case_args)  # warmup / JIT
        t_nb = time_best(nb_fn, case_args, args.repeat)
        print(f"{name:<20} {t_np:>12.4f} {t_nb:>12.4f} {t_np / t_nb:>8.1f}x")


if __name__ == "__main__":
    main()

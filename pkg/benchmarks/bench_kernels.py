#!/usr/bin/env python3
"""Time the numba kernels against the pure-numpy fallback.

Run: python benchmarks/bench_kernels.py [--trials 2000] [--n 512] [--k 256]
Both backends are imported directly, so the LFHT_KERNEL env flag is not
needed here; outputs are asserted equal before timing.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from lfht_lab.kernels import _numba_impl, _numpy_impl


def bench(fn, *args, repeat=5):
    fn(*args)  # warmup / jit
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--trials", type=int, default=2000)
    parser.add_argument("--n", type=int, default=512)
    parser.add_argument("--m", type=int, default=256)
    parser.add_argument("--k", type=int, default=256)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    obs = rng.integers(1, args.k + 1, size=(args.trials, args.n)).astype(np.int64)
    obs_m = rng.integers(1, args.k + 1, size=(args.trials, args.m)).astype(np.int64)
    cx = _numpy_impl.batch_counts(obs, args.k)
    cy = _numpy_impl.batch_counts(obs, args.k)
    cz = _numpy_impl.batch_counts(obs_m, args.k)

    cases = [
        ("batch_counts", (obs, args.k)),
        ("l2_diff_numerator", (cx, cy, cz, args.n, args.m)),
        ("collision_pairs", (cx,)),
    ]
    print(f"trials={args.trials} n={args.n} m={args.m} k={args.k}")
    print(f"{'kernel':<20} {'numpy (ms)':>12} {'numba (ms)':>12} {'speedup':>9}")
    for name, call_args in cases:
        np_fn = getattr(_numpy_impl, name)
        nb_fn = getattr(_numba_impl, name)
        assert np.array_equal(np_fn(*call_args), nb_fn(*call_args)), name
        t_np = bench(np_fn, *call_args)
        t_nb = bench(nb_fn, *call_args)
        print(f"{name:<20} {t_np * 1e3:>12.3f} {t_nb * 1e3:>12.3f} {t_np / t_nb:>8.1f}x")


if __name__ == "__main__":
    main()

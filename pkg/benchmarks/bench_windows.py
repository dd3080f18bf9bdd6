#!/usr/bin/env python3
"""Benchmark the window-aggregation kernels: numba @njit vs pure fallback.

Usage: python benchmarks/bench_windows.py [--events N] [--sources S]

The numba path is also what GRIDCEP_NUMBA=1 (default) selects at runtime;
GRIDCEP_NUMBA=0 forces the pure path. Results are bit-identical between
the two; this script only measures speed.
"""

from __future__ import annotations

import argparse
import random
import time

import numpy as np

from gridcep.runtime.window_kernel import FN_AVG, FN_SUM, get_kernels


def make_trace(n: int, n_sources: int, seed: int = 42):
    rng = random.Random(seed)
    ts, out_ts = 0, np.empty(n, dtype=np.int64)
    vals = np.empty(n, dtype=np.float64)
    src = np.empty(n, dtype=np.int64)
    for i in range(n):
        ts += rng.randint(1, 10)
        out_ts[i] = ts
        vals[i] = rng.uniform(0, 50)
        src[i] = rng.randrange(n_sources)
    return out_ts, vals, src


def bench(label, fn, *args, repeat=3):
    fn(*args)  # warm-up (and JIT compile for the numba path)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    print(f"  {label:<28} {best * 1000:10.1f} ms")
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--events", type=int, default=200_000)
    ap.add_argument("--sources", type=int, default=32)
    args = ap.parse_args()

    ts, vals, src = make_trace(args.events, args.sources)
    jit = get_kernels(use_numba=True)
    pure = get_kernels(use_numba=False)
    if jit is pure:
        print("numba unavailable; benchmarking the pure path only")

    cases = [
        ("sliding_time  AVG W=600", "sliding_time", (ts, vals, np.int64(600), FN_AVG)),
        ("sliding_count SUM N=64", "sliding_count", (ts, vals, np.int64(64), FN_SUM)),
        ("batch_time    SUM W=600", "batch_time",
         (ts, vals, np.int64(600), FN_SUM, np.int64(-1), np.int64(-1))),
        ("batch_count   AVG N=64", "batch_count", (ts, vals, np.int64(64), FN_AVG)),
        ("latest        SUM W=600", "latest", (ts, vals, src, np.int64(600), FN_SUM)),
    ]

    print(f"{args.events} events, {args.sources} sources\n")
    speedups = []
    for label, name, fargs in cases:
        print(label)
        t_pure = bench("pure numpy fallback", pure[name], *fargs)
        if jit is not pure:
            t_jit = bench("numba @njit", jit[name], *fargs)
            check_p = pure[name](*fargs)
            check_j = jit[name](*fargs)
            identical = all(np.array_equal(a, b) for a, b in zip(check_p, check_j))
            speedups.append(t_pure / t_jit)
            print(f"  {'speedup':<28} {t_pure / t_jit:10.1f} x   "
                  f"(outputs bit-identical: {identical})")
        print()
    if speedups:
        print(f"geometric-mean speedup: "
              f"{np.exp(np.mean(np.log(speedups))):.1f}x")


if __name__ == "__main__":
    main()

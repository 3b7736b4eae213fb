#!/usr/bin/env python3
"""Benchmark the JIT-compiled kernels against the interpreted fallback.

Usage:
    python benchmarks/bench_kernels.py [--iters N]

With numba available (the default install) both paths are timed in one
process via the dispatchers' .py_func. Under DTAPSIM_NO_NUMBA=1 only the
fallback exists, so only that column is reported. Ends with a short
end-to-end simulation timing.
"""

import argparse
import time

import numpy as np

from dtapsim import kernels
from dtapsim.config import make_config
from dtapsim.runner import run as run_sim


def time_call(func, args, iters):
    func(*args)  # warmup / JIT
    best = float("inf")
    for _ in range(5):
        t0 = time.perf_counter()
        for _ in range(iters):
            func(*args)
        best = min(best, (time.perf_counter() - t0) / iters)
    return best * 1e6  # microseconds per call


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--iters", type=int, default=20_000)
    args = parser.parse_args()

    rng = np.random.default_rng(1)
    p = kernels.project_simplex(rng.normal(0, 1, 5), 0.01)
    z = kernels.project_simplex(rng.normal(0, 1, 5), 0.01)
    q = rng.normal(-50, 10, 5)
    g = kernels.advantage_gradient(q, p)
    v = rng.normal(0, 2, 5)

    cases = [
        ("project_simplex", kernels.project_simplex, (v, 0.01)),
        ("entropy_bits", kernels.entropy_bits, (p,)),
        ("sample_index", kernels.sample_index, (p, 0.62)),
        ("advantage_gradient", kernels.advantage_gradient, (q, p)),
        ("wpl_step", kernels.wpl_step, (p, g, 0.001, 0.01)),
        ("giga_step", kernels.giga_step, (p, z, g, 0.001, 0.01)),
        ("observe_wpl", kernels.observe_wpl, (p.copy(), q.copy(), 1, -30.0, 0.1, 0.001, 0.01)),
        ("observe_giga", kernels.observe_giga, (p.copy(), q.copy(), z.copy(), 1, -30.0, 0.1, 0.001, 0.01)),
    ]

    print(f"kernel path: {'numba JIT' if kernels.USING_NUMBA else 'interpreted fallback'}")
    print(f"{'kernel':<20} {'jit (us)':>10} {'python (us)':>12} {'speedup':>8}")
    for name, func, call_args in cases:
        if kernels.USING_NUMBA:
            jit_us = time_call(func, call_args, args.iters)
            py_us = time_call(func.py_func, call_args, max(args.iters // 20, 100))
            print(f"{name:<20} {jit_us:>10.3f} {py_us:>12.3f} {py_us / jit_us:>7.1f}x")
        else:
            py_us = time_call(func, call_args, max(args.iters // 20, 100))
            print(f"{name:<20} {'-':>10} {py_us:>12.3f} {'-':>8}")

    cfg = make_config(
        overrides={
            "grid_rows": 6,
            "grid_cols": 6,
            "generator_rows": 2,
            "generator_cols": 2,
            "arrival_rate": 0.4,
            "duration": 10_000,
            "window": 1000,
            "seed": 1,
        }
    )
    import tempfile

    with tempfile.TemporaryDirectory() as d:
        t0 = time.perf_counter()
        result = run_sim(cfg, out_dir=d)
        dt = time.perf_counter() - t0
    print(
        f"\nend-to-end: 6x6 grid, 10k ticks, {result.summary['tasks_completed']} tasks "
        f"in {dt:.2f}s ({cfg.duration / dt:,.0f} ticks/s)"
    )
    print("rerun with DTAPSIM_NO_NUMBA=1 to time the fallback end to end")


if __name__ == "__main__":
    main()

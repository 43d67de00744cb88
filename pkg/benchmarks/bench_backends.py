#!/usr/bin/env python3
"""Compare the compiled and pure-Python integration kernels.

Two workloads: one long trajectory (a year at the default step), and the
calibration hot path (a full rho grid sweep over a 51-day window, 1001
integrations). Reports best-of-five wall times and the speedup.

Run from the repo root: python3 benchmarks/bench_backends.py
"""

import importlib.util
import sys
import time

import numpy as np

if importlib.util.find_spec("epifit._kernels") is None:
    sys.exit("compiled kernel not available; build the package first")

from epifit import _kernels, _kernels_py

N_SUB = 10  # default 0.1-day step


def run(mod, s0, i0, r0, beta, gamma, rho, n_days):
    population = s0 + i0 + r0
    out = [np.empty(n_days + 1) for _ in range(3)]
    status = mod.run_sir(s0, i0, r0, beta, gamma, rho, population, n_days,
                         N_SUB, 1e-9 * population, *out)
    assert status == -1
    return out


def year_trajectory(mod):
    run(mod, 995.0, 5.0, 0.0, 0.2, 1 / 14, 0.2, 365)


def calibration_grid(mod):
    # what calibrate_rho does for one region at grid step 0.001
    for k in range(1001):
        run(mod, 1209651644.0, 467929.0, 450000.0, 0.1738, 1 / 14,
            k / 1000.0, 50)


def best_of(fn, mod, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(mod)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    workloads = [
        ("365-day trajectory", year_trajectory),
        ("rho grid (1001 runs)", calibration_grid),
    ]
    print(f"{'workload':<22} {'compiled':>12} {'pure python':>12} {'speedup':>9}")
    for name, fn in workloads:
        compiled = best_of(fn, _kernels)
        pure = best_of(fn, _kernels_py)
        print(f"{name:<22} {compiled * 1e3:>10.2f}ms {pure * 1e3:>10.2f}ms "
              f"{pure / compiled:>8.1f}x")


if __name__ == "__main__":
    main()

"""Timing comparison of the point kernels.

Runs the determinant-path field assembly through the compiled kernel
and the numpy fallback over a sweep of grid sizes and pole counts,
printing per-call wall time and the speedup.  Usage:

    python3 bench/benchmark_kernels.py [--repeats 5]
"""

import argparse
import time

import numpy as np

from chiralfield import kernels


def profile(npts, seed=0):
    rng = np.random.default_rng(seed)
    return rng.uniform(-3, 3, npts), rng.uniform(-3, 3, npts)


CONFIGS = [
    ("1 pole", [-2.0], [1.0]),
    ("2 poles", [-2.0, 3.0], [1.0, 2.0]),
    ("3 poles", [-2.0, 3.0, -0.6], [1.0, 2.0, 0.7]),
    ("conj pair", [0.5 + 0.8j, 0.5 - 0.8j], [1 + 0.5j, 1 - 0.5j]),
]


def best_time(fn, repeats):
    out = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        out = min(out, time.perf_counter() - t0)
    return out


def run(repeats):
    if not kernels.HAVE_NATIVE:
        print("compiled kernel not built; timing the fallback only")
    sizes = [129 * 129, 257 * 257, 513 * 513]
    header = f"{'config':<10} {'points':>8} {'fallback':>10}"
    if kernels.HAVE_NATIVE:
        header += f" {'native':>10} {'speedup':>8}"
    print(header)
    for name, mus, cs in CONFIGS:
        for npts in sizes:
            L, Lt = profile(npts)
            t_fb = best_time(lambda: kernels.fallback_points(mus, cs, L, Lt),
                             repeats)
            row = f"{name:<10} {npts:>8} {t_fb * 1e3:>8.1f}ms"
            if kernels.HAVE_NATIVE:
                t_nat = best_time(
                    lambda: kernels.native_points(mus, cs, L, Lt), repeats
                )
                row += f" {t_nat * 1e3:>8.1f}ms {t_fb / t_nat:>7.1f}x"
            print(row)


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=5,
                    help="take the best of this many runs")
    run(ap.parse_args().repeats)

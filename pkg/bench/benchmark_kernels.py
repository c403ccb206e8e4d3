#!/usr/bin/env python3
"""Time the numba kernels against the pure-numpy fallbacks.

Run:  python3 bench/benchmark_kernels.py [--repeat N]
"""

import argparse
import time

import numpy as np

from horolab import _kernels as K


def timed(fn, *args, repeat=3):
    best = float("inf")
    for _ in range(repeat):
        tic = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - tic)
    return best


CASES = [
    ("phi_sieve(5e6)", "phi_sieve", (5_000_000,)),
    ("mobius_sieve(5e6)", "mobius_sieve", (5_000_000,)),
    ("jordan_sieve(1e6, 2)", "jordan_sieve", (1_000_000, 2)),
    ("floor_diff_prefix(1e6)", "floor_diff_prefix", (0.123, 0.877, 1_000_000, 1.0)),
    ("farey_d2(4000)", "farey_d2", (4000, 0.0, 1.0)),
    ("farey_d3(250)", "farey_d3", (250, 0.0, 1.0, 0.0, 1.0)),
    ("primitive_box(+-150)", "primitive_box", (np.array([-150.0, -150.0, -150.0]), np.array([150.0, 150.0, 150.0]))),
]


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    if K.NUMBA_IMPLS is None:
        print("numba unavailable; timing the numpy path only")
    print(f"{'kernel':28s} {'numpy':>10s} {'numba':>10s} {'speedup':>9s}")
    for label, name, fargs in CASES:
        t_np = timed(K.NUMPY_IMPLS[name], *fargs, repeat=args.repeat)
        if K.NUMBA_IMPLS is not None:
            K.NUMBA_IMPLS[name](*fargs)  # compile outside the timer
            t_nb = timed(K.NUMBA_IMPLS[name], *fargs, repeat=args.repeat)
            print(f"{label:28s} {t_np:9.3f}s {t_nb:9.3f}s {t_np / t_nb:8.1f}x")
        else:
            print(f"{label:28s} {t_np:9.3f}s {'-':>10s} {'-':>9s}")


if __name__ == "__main__":
    main()

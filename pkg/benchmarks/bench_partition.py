#!/usr/bin/env python3
"""Time the jitted enumeration kernel against the pure-numpy fallback.

The O(N^3) class sum is the package's only hot loop; this script runs both
implementations on identical inputs, checks they agree, and prints the
speedup (first jitted call includes compilation and is reported separately).

Usage: python benchmarks/bench_partition.py [N ...]
"""

import pathlib
import sys
import time

import numpy as np
from scipy.special import gammaln

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

from dimerfield import ModelParams, split_sizes  # noqa: E402
from dimerfield._kernels import _partition_sums_numpy, get_numba_kernel  # noqa: E402


def kernel_args(n, params):
    sizes = split_sizes(n, params.alpha)
    lgf = gammaln(np.arange(n + 2, dtype=float) + 1.0)
    return (
        sizes.n_a,
        sizes.n_b,
        float(np.log(n)),
        1.0 / n,
        lgf,
        np.ascontiguousarray(params.h),
        np.ascontiguousarray(params.j_sym),
    )


def best_of(fn, args, repeats=3):
    times = []
    result = None
    for _ in range(repeats):
        start = time.perf_counter()
        result = fn(*args)
        times.append(time.perf_counter() - start)
    return min(times), result


def main(argv):
    sizes = [int(a) for a in argv[1:]] or [100, 200, 400, 800]
    params = ModelParams(
        alpha=0.5,
        h=np.array([0.1, -0.2, 0.3]),
        J=np.array([[0.2, -0.1, 0.4], [-0.1, 0.3, -0.2], [0.4, -0.2, 0.5]]),
    )
    jitted = get_numba_kernel()
    if jitted is None:
        print("numba unavailable; nothing to compare")
        return 1

    start = time.perf_counter()
    jitted(*kernel_args(sizes[0], params))
    compile_time = time.perf_counter() - start
    print(f"jit warmup (incl. compile): {compile_time:.2f} s\n")

    print(f"{'N':>6} {'numba [s]':>12} {'numpy [s]':>12} {'speedup':>9} {'max |diff|':>12}")
    for n in sizes:
        args = kernel_args(n, params)
        t_jit, r_jit = best_of(jitted, args)
        t_np, r_np = best_of(_partition_sums_numpy, args)
        diff = max(abs(a - b) for a, b in zip(r_jit, r_np))
        print(f"{n:>6} {t_jit:>12.4f} {t_np:>12.4f} {t_np / t_jit:>8.1f}x {diff:>12.2e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main(sys.argv))

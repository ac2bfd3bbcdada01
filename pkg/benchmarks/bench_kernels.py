"""Compare the compiled and pure-Python sampling kernels.

    python benchmarks/bench_kernels.py --samples 1000000 --repeat 3
"""
import argparse
import math
import time

import numpy as np

from bellsim import _fallback, backend
from bellsim.observables import chsh_point
from bellsim.sampler import sample_block


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--samples", type=int, default=1_000_000)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--pairs", type=int, default=1)
    args = parser.parse_args()

    kernels = [("python", _fallback)]
    if backend.compiled is not None:
        kernels.append(("cython", backend.compiled))
    else:
        print("compiled kernel not built; timing the numpy kernel only")

    print(f"{'kernel':8s} {'sampler':10s} {'seconds':>9s} {'ns/sample':>10s}")
    results = {}
    for kind in ("exact", "rejection"):
        for name, kernel in kernels:
            t = best_of(lambda: sample_block(1, 0, args.samples, args.pairs, kind, backend=kernel), args.repeat)
            results[name, kind] = t
            print(f"{name:8s} {kind:10s} {t:9.3f} {1e9 * t / args.samples:10.1f}")
    if len(kernels) == 2:
        for kind in ("exact", "rejection"):
            print(f"speedup ({kind}): {results['python', kind] / results['cython', kind]:.2f}x")

    # the rest of a CHSH point is numpy work shared by both kernels
    p = sample_block(1, 0, args.samples, args.pairs)
    t = best_of(lambda: chsh_point(p, math.pi / 8), args.repeat)
    print(f"observables for one angle: {t:.3f} s ({1e9 * t / args.samples:.1f} ns/sample)")
    a = sample_block(1, 0, 10_000, args.pairs, backend=_fallback).alpha
    if backend.compiled is not None:
        b = sample_block(1, 0, 10_000, args.pairs, backend=backend.compiled).alpha
        print(f"max |python - cython| on 10^4 samples: {np.abs(a - b).max():.2e}")


if __name__ == "__main__":
    main()

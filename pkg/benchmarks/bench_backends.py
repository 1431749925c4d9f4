#!/usr/bin/env python3
"""Benchmark the compiled DP kernel against the pure-Python fallback.

Times ``dp_cost_table`` on uniform and Gaussian quantile discretizations for
several (n, k, p) combinations and prints a comparison table.  Verifies that
both backends agree on the optimum before reporting.

Usage: python benchmarks/bench_backends.py [--quick]
"""

import argparse
import time
from statistics import NormalDist

import numpy as np

from kquant._backend import available_backends


def _uniform(n):
    x = (2.0 * np.arange(1, n + 1) - 1.0) / (2.0 * n)
    return x, np.full(n, 1.0 / n)


def _gauss(n):
    nd = NormalDist()
    x = np.array([nd.inv_cdf((2 * i - 1) / (2 * n)) for i in range(1, n + 1)])
    return x, np.full(n, 1.0 / n)


def _time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true",
                        help="smaller sizes, single repetition")
    args = parser.parse_args()

    backends = available_backends()
    print(f"available backends: {', '.join(backends)}")
    repeats = 1 if args.quick else 2
    # (label, generator, n, k, p, python_cap): the fallback runs only when
    # n <= python_cap, since some cost kinds are much slower without the
    # compiled kernel
    if args.quick:
        cases = [
            ("uniform", _uniform, 2_000, 5, 1.0, 2_000),
            ("uniform", _uniform, 2_000, 5, 2.0, 2_000),
            ("uniform", _uniform, 2_000, 5, 3.0, 2_000),
            ("gauss", _gauss, 5_000, 3, 2.0, 5_000),
        ]
    else:
        cases = [
            ("uniform", _uniform, 10_000, 5, 1.0, 10_000),
            ("uniform", _uniform, 10_000, 5, 2.0, 10_000),
            ("uniform", _uniform, 10_000, 5, 3.0, 2_000),
            ("uniform", _uniform, 500, 5, 2.5, 500),
            ("gauss", _gauss, 100_000, 3, 2.0, 20_000),
        ]

    header = (f"{'case':<10} {'n':>7} {'k':>2} {'p':>4} "
              + "".join(f"{name + ' (s)':>14}" for name in backends)
              + f"{'speedup':>10}")
    print(header)
    print("-" * len(header))
    for label, gen, n, k, p, python_cap in cases:
        x, w = gen(n)
        times = {}
        values = {}
        for name, mod in backends.items():
            size = n if (name != "python" or n <= python_cap) else python_cap
            xs, ws = (x, w) if size == n else gen(size)
            elapsed, table = _time(lambda: mod.dp_cost_table(xs, ws, k, p),
                                   repeats)
            times[name] = (elapsed, size)
            if size == n:
                values[name] = float(np.min(table[1:, n]))
        if len(values) == 2:
            a, b = values.values()
            assert abs(a - b) <= 1e-9 * (1 + abs(a)), "backend disagreement"
        row = f"{label:<10} {n:>7} {k:>2} {p:>4} "
        for name in backends:
            elapsed, size = times[name]
            note = "" if size == n else f"@{size}"
            row += f"{elapsed:>10.4f}{note:>4}"
        cy = times.get("cython")
        py = times.get("python")
        if cy and py and cy[1] == py[1] and cy[0] > 0:
            row += f"{py[0] / cy[0]:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()

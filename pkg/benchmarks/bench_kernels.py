"""Compare the compiled and pure-numpy kernel backends.

Times the three group-statistics kernels on synthetic worst-case-ish data
(many groups, moderate group sizes) and one end-to-end subset evaluation on a
generated log. The compiled path is warmed once before timing so compilation
cost is reported separately.

Run:  python3 benchmarks/bench_kernels.py [--rows 2000000] [--repeats 5]
"""

from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from tradeopt.kernels import _BACKENDS, use_backend
from tradeopt.fixtures import random_log
from tradeopt.objectives import ObjectiveProvider, ObjectiveSpec


def _timeit(fn, repeats):
    samples = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t0)
    return min(samples), statistics.median(samples)


def bench_kernels(rows: int, repeats: int):
    rng = np.random.default_rng(0)
    n_groups = max(rows // 50, 1)
    codes = rng.integers(0, n_groups, size=rows)
    items = rng.integers(0, 200, size=rows)
    args = {
        "entropy_rows": (codes, items, 200, 0.1),
        "maxprob_rows": (codes, items, 200, 0.1),
        "distinct_rows": (codes, items, 200),
    }
    print(f"kernels: {rows} rows, ~{n_groups} groups, 200 items")
    header = f"{'kernel':<14}" + "".join(f"{name:>14}" for name in _BACKENDS)
    print(header)
    for kernel, a in args.items():
        line = f"{kernel:<14}"
        for name, mod in _BACKENDS.items():
            fn = getattr(mod, kernel)
            fn(*a)  # warm-up (JIT compile / cache touch)
            best, med = _timeit(lambda: fn(*a), repeats)
            line += f"{best * 1e3:>10.2f} ms"
        print(line)


def bench_end_to_end(rows: int, repeats: int):
    log = random_log(1, n_attrs=10, max_card=4, n_users=rows // 40 or 1,
                     n_queries=50, n_intents=8, n_rows=rows)
    subset = tuple(range(6))
    print(f"\nend-to-end evaluate(6 of 10 attrs): {rows} rows")
    for name in _BACKENDS:
        with use_backend(name):
            provider = ObjectiveProvider(ObjectiveSpec(source=log))
            provider.evaluate(subset)  # warm-up

            def run():
                p = ObjectiveProvider(ObjectiveSpec(source=log))
                p.evaluate(subset)

            best, med = _timeit(run, repeats)
        print(f"{name:<8} best {best * 1e3:8.2f} ms   median {med * 1e3:8.2f} ms")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--rows", type=int, default=2_000_000)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()
    bench_kernels(args.rows, args.repeats)
    bench_end_to_end(min(args.rows, 500_000), args.repeats)


if __name__ == "__main__":
    main()

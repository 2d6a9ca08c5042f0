#!/usr/bin/env python3
"""Benchmark the compiled hot kernels against the pure-Python fallback.

Usage:
    python benchmarks/bench_kernels.py [--sizes 100,300,1000] [--repeats 3]

Reports wall time per call for the warping-cost kernel (unbanded and
banded) and the envelope/lower-bound pair, plus the speedup of the
compiled extension when it is available.
"""

import argparse
import timeit

import numpy as np

from hbdiag import kernels


def bench(fn, repeats):
    times = timeit.repeat(fn, number=1, repeat=repeats)
    return min(times)


def fmt(seconds):
    if seconds < 1e-3:
        return f"{seconds * 1e6:8.1f} us"
    if seconds < 1.0:
        return f"{seconds * 1e3:8.2f} ms"
    return f"{seconds:8.2f} s "


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="100,300,1000",
                        help="comma-separated series lengths")
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    backends = kernels.available_backends()
    if "compiled" not in backends:
        print("note: compiled extension not built; timing the fallback only")

    rng = np.random.default_rng(0)
    rows = []
    for n in sizes:
        q = rng.normal(size=n)
        c = rng.normal(size=n)
        cases = [
            (f"dtw abs       n={n}", lambda b, q=q, c=c: b.dtw(q, c, False, -1)),
            (f"dtw sq band16 n={n}", lambda b, q=q, c=c: b.dtw(q, c, True, 16)),
            (f"envelope w=10 n={n}", lambda b, q=q: b.envelope(q, 10)),
        ]
        u, l = backends["python"].envelope(q, 10)
        cases.append(
            (f"lb_keogh      n={n}",
             lambda b, c=c, u=u, l=l: b.lb_keogh_value(c, u, l))
        )
        for name, call in cases:
            row = {"case": name}
            for bname, backend in backends.items():
                row[bname] = bench(lambda: call(backend), args.repeats)
            rows.append(row)

    have_both = "compiled" in backends
    header = f"{'case':<22} {'python':>12}"
    if have_both:
        header += f" {'compiled':>12} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for row in rows:
        line = f"{row['case']:<22} {fmt(row['python']):>12}"
        if have_both:
            speedup = row["python"] / row["compiled"]
            line += f" {fmt(row['compiled']):>12} {speedup:>8.1f}x"
        print(line)


if __name__ == "__main__":
    main()

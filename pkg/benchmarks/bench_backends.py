#!/usr/bin/env python3
"""Benchmark the compiled kernel backend against the pure NumPy fallback.

Times the three hot layers (expression VM, basis-window weights, full operator
evaluation) on workloads shaped like the acceptance experiments and prints a
comparison table.

Usage:
    python benchmarks/bench_backends.py [--repeat N]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from szmd import OperatorParams, evaluate, expression_function
from szmd import _backend


def _time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _workloads():
    f_smooth = expression_function("exp(-x)", 0.0, 1.0)
    f_mixed = expression_function("exp(-x)*sin(x) + x^2/(1+x)", 1.0, 2.0)
    prog = f_mixed.program()
    t_grid = np.linspace(0.0, 10.0, 200_000)

    def vm():
        _backend.kernels().eval_program(prog.code, prog.consts, t_grid)

    def basis():
        _backend.kernels().basis_window(500.0, 2.0, 0, 2000)

    def op_small():
        evaluate(OperatorParams(200.0, 2), f_mixed, 1.5)

    def op_large():
        evaluate(OperatorParams(10240.0, 1), f_smooth, 1.0)

    return [
        ("expression VM, 200k points", vm),
        ("basis window, 2001 terms", basis),
        ("evaluate n=200 (mixed expr)", op_small),
        ("evaluate n=10240 (exp(-x))", op_large),
    ]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=3,
                        help="repetitions per measurement (best is kept)")
    args = parser.parse_args()

    names = _backend.available_backends()
    if "compiled" not in names:
        print("compiled backend not available; only timing the pure backend")

    rows = []
    for label, fn in _workloads():
        timings = {}
        for name in names:
            _backend.set_backend(name)
            fn()  # warm up (compiles programs, fills caches)
            timings[name] = _time(fn, args.repeat)
        rows.append((label, timings))
    _backend.set_backend(names[-1] if "compiled" not in names else "compiled")

    width = max(len(label) for label, _ in rows)
    header = f"{'workload':<{width}}  " + "".join(f"{n:>12}" for n in names)
    if len(names) > 1:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for label, timings in rows:
        line = f"{label:<{width}}  " + "".join(
            f"{timings[n] * 1e3:>10.2f}ms" for n in names
        )
        if "compiled" in timings and "python" in timings:
            line += f"{timings['python'] / timings['compiled']:>9.2f}x"
        print(line)


if __name__ == "__main__":
    main()

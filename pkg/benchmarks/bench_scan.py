"""Benchmark the compiled strategy-scan kernel against the pure-numpy fallback.

Runs the full second-party enumeration for a ladder of composed games and a
random wide instance, reporting strategies/second for both engines and the
speedup.  Usage: python3 benchmarks/bench_scan.py [--repeats N] [--max-copies N]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from bellforge import ParallelGameSpec, chsh, parallel_compose
from bellforge.core import BellFunctional, RationalTensor, Scenario
from bellforge.localbound import HAVE_COMPILED_KERNEL
from bellforge import _scan_py

if HAVE_COMPILED_KERNEL:
    from bellforge import _scan
else:
    _scan = None


def _cases(max_copies: int):
    for copies in range(1, max_copies + 1):
        game = parallel_compose(ParallelGameSpec(chsh(), copies, threshold=copies))
        yield f"two-input binary ^{copies}", game.tensor
    rng = np.random.default_rng(1)
    wide = BellFunctional(
        Scenario(4, 8, 3, 3), RationalTensor(rng.integers(-50, 51, size=(4, 8, 3, 3)), 7)
    )
    yield "random 4x8 inputs, 3 outputs", wide


def _prepare(functional: BellFunctional) -> tuple[np.ndarray, int]:
    num = np.ascontiguousarray(functional.coefficients.num.astype(np.int64))
    scenario = functional.scenario
    return num, scenario.kB**scenario.sB


def _time(kernel, num: np.ndarray, total: int, repeats: int) -> tuple[float, tuple]:
    best_elapsed = float("inf")
    result = None
    for _ in range(repeats):
        started = time.perf_counter()
        result = kernel(num, 0, total)
        best_elapsed = min(best_elapsed, time.perf_counter() - started)
    return best_elapsed, result


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=3, help="keep the fastest of N runs")
    parser.add_argument("--max-copies", type=int, default=3)
    args = parser.parse_args()

    if _scan is None:
        print("compiled kernel unavailable; timing the fallback only")
    header = f"{'case':<32} {'strategies':>12} {'python':>12} {'compiled':>12} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for label, functional in _cases(args.max_copies):
        num, total = _prepare(functional)
        py_time, py_result = _time(_scan_py.scan_range, num, total, args.repeats)
        row = f"{label:<32} {total:>12,} {total / py_time:>10,.0f}/s"
        if _scan is not None:
            c_time, c_result = _time(_scan.scan_range, num, total, args.repeats)
            if c_result != py_result:
                raise SystemExit(f"engines disagree on {label}: {c_result} vs {py_result}")
            row += f" {total / c_time:>10,.0f}/s {py_time / c_time:>7.1f}x"
        print(row)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

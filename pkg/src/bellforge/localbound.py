"""Exact local bounds over deterministic strategies, plus see-saw lower bounds.

The exact bound enumerates every assignment of the party with fewer
deterministic strategies and takes the other party's best response per
input.  Coefficients are put on a common integer denominator first, so the
whole scan is integer arithmetic; a compiled kernel does the walking when
available, with a numpy fallback selected at import time.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import BellFunctional, DeterministicStrategy, Scenario
from .errors import BudgetExceeded, InternalError

from . import _scan_py

_compiled = None
if not os.environ.get("BELLFORGE_PURE"):
    try:
        from . import _scan as _compiled  # type: ignore[no-redef]
    except ImportError:
        _compiled = None

HAVE_COMPILED_KERNEL = _compiled is not None
DEFAULT_BUDGET = 1 << 27


def default_threads() -> int:
    env = os.environ.get("BELLFORGE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


@dataclass(frozen=True)
class LocalBoundResult:
    value: Fraction
    alice: DeterministicStrategy
    bob: DeterministicStrategy
    exact: bool
    strategies_scanned: int
    engine: str
    seconds: float


def _integer_grid(functional: BellFunctional) -> tuple[np.ndarray, int, bool]:
    """Numerators on the common denominator; int64 when provably safe.

    Safe means the largest possible strategy score, summed absolute
    per-setting maxima, stays below 2**62.
    """
    coeffs = functional.coefficients
    num = coeffs.num
    if num.dtype == object:
        bound = sum(
            max(abs(int(v)) for v in num[x, y].flat)
            for x in range(num.shape[0])
            for y in range(num.shape[1])
        )
        if bound < 2**62:
            return num.astype(np.int64), coeffs.den, True
        return num, coeffs.den, False
    widest = np.abs(num.astype(np.int64)).reshape(num.shape[0], num.shape[1], -1).max(axis=2)
    if int(widest.sum()) < 2**62:
        return np.ascontiguousarray(num.astype(np.int64)), coeffs.den, True
    return num.astype(object), coeffs.den, False


def _decode_assignment(index: int, inputs: int, outputs: int) -> tuple[int, ...]:
    digits = []
    for _ in range(inputs):
        digits.append(index % outputs)
        index //= outputs
    return tuple(digits)


def _best_response(num: np.ndarray, assignment: tuple[int, ...]) -> tuple[tuple[int, ...], int]:
    """First party's argmax response to the second party's assignment."""
    sA, sB, kA, _ = num.shape
    response = []
    total = 0
    for x in range(sA):
        scores = [sum(int(num[x, y, a, assignment[y]]) for y in range(sB)) for a in range(kA)]
        best_a = max(range(kA), key=lambda a: (scores[a], -a))
        response.append(best_a)
        total += scores[best_a]
    return tuple(response), total


def _run_scan(num: np.ndarray, chunks: list[tuple[int, int]], threads: int, use_compiled: bool):
    kernel = _compiled.scan_range if use_compiled else _scan_py.scan_range
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda c: kernel(num, c[0], c[1]), chunks))
    else:
        results = [kernel(num, lo, hi) for lo, hi in chunks]
    best, best_idx, scanned = None, -1, 0
    for result in results:
        if result is None:
            continue
        value, idx, count = result
        scanned += count
        if best is None or value > best or (value == best and idx < best_idx):
            best, best_idx = value, idx
    return best, best_idx, scanned


def local_bound_exact(
    functional: BellFunctional,
    threads: int | None = None,
    budget: int = DEFAULT_BUDGET,
    force_party: str | None = None,
) -> LocalBoundResult:
    """Exact local bound by full enumeration of the smaller party.

    Raises BudgetExceeded (carrying the best-so-far result, flagged
    inexact) when the enumerated strategy count exceeds the budget.
    """
    start_time = time.perf_counter()
    scenario = functional.scenario
    threads = threads or default_threads()
    num, den, int64_ok = _integer_grid(functional)

    n_alice = scenario.kA**scenario.sA
    n_bob = scenario.kB**scenario.sB
    if force_party is None:
        enumerate_alice = n_alice < n_bob
    else:
        enumerate_alice = force_party == "alice"
    if enumerate_alice:
        num = np.ascontiguousarray(np.transpose(num, (1, 0, 3, 2)))
        total = n_alice
    else:
        total = n_bob

    truncated = total > budget
    span = budget if truncated else total
    n_chunks = min(max(1, threads * 4), max(1, span // 4096)) if span > 8192 else 1
    bounds = np.linspace(0, span, n_chunks + 1, dtype=np.int64)
    chunks = [(int(bounds[i]), int(bounds[i + 1])) for i in range(n_chunks)]
    use_compiled = HAVE_COMPILED_KERNEL and int64_ok
    best, best_idx, scanned = _run_scan(num, chunks, threads, use_compiled)
    if best is None:
        raise InternalError("scan produced no result")

    inputs = num.shape[1]
    outputs = num.shape[3]
    enum_assignment = _decode_assignment(best_idx, inputs, outputs)
    responder_assignment, check = _best_response(num, enum_assignment)
    if check != best:
        raise InternalError("witness re-evaluation disagrees with scanned best")

    if enumerate_alice:
        alice = DeterministicStrategy("alice", enum_assignment)
        bob = DeterministicStrategy("bob", responder_assignment)
    else:
        alice = DeterministicStrategy("alice", responder_assignment)
        bob = DeterministicStrategy("bob", enum_assignment)
    result = LocalBoundResult(
        value=Fraction(best, den),
        alice=alice,
        bob=bob,
        exact=not truncated,
        strategies_scanned=scanned,
        engine="compiled" if use_compiled else "python",
        seconds=time.perf_counter() - start_time,
    )
    if truncated:
        raise BudgetExceeded(
            f"{total} strategies exceed budget {budget}; partial bound attached",
            partial=result,
        )
    return result


def local_bound_naive(functional: BellFunctional, budget: int = 4_000_000) -> LocalBoundResult:
    """Reference oracle: enumerate both parties outright.  Slow by design."""
    start_time = time.perf_counter()
    scenario = functional.scenario
    num = functional.coefficients.num
    den = functional.coefficients.den
    n_alice = scenario.kA**scenario.sA
    n_bob = scenario.kB**scenario.sB
    if n_alice * n_bob > budget:
        raise BudgetExceeded(f"{n_alice * n_bob} strategy pairs exceed budget {budget}")
    best = None
    best_pair = None
    for ia in range(n_alice):
        ga = _decode_assignment(ia, scenario.sA, scenario.kA)
        for ib in range(n_bob):
            fb = _decode_assignment(ib, scenario.sB, scenario.kB)
            value = 0
            for x in range(scenario.sA):
                for y in range(scenario.sB):
                    value += int(num[x, y, ga[x], fb[y]])
            if best is None or value > best:
                best = value
                best_pair = (ga, fb)
    assert best is not None and best_pair is not None
    return LocalBoundResult(
        value=Fraction(best, den),
        alice=DeterministicStrategy("alice", best_pair[0]),
        bob=DeterministicStrategy("bob", best_pair[1]),
        exact=True,
        strategies_scanned=n_alice * n_bob,
        engine="naive",
        seconds=time.perf_counter() - start_time,
    )


def seesaw_lower_bound(
    functional: BellFunctional,
    restarts: int = 64,
    seed: int = 0,
    max_iters: int = 1000,
) -> LocalBoundResult:
    """Alternating best responses from random starts; a lower bound only.

    The value is exact for the strategies found, but nothing certifies they
    are globally optimal.
    """
    start_time = time.perf_counter()
    scenario = functional.scenario
    num, den, int64_ok = _integer_grid(functional)
    sA, sB, kA, kB = num.shape
    sum_kwargs = {} if num.dtype == object else {"dtype": np.int64}
    ar_a = np.arange(sA)
    ar_b = np.arange(sB)
    rng = np.random.default_rng(seed)

    best_value = None
    best_pair = None
    sweeps = 0
    for _ in range(restarts):
        f = rng.integers(0, kB, size=sB)
        g = None
        seen = set()
        for _ in range(max_iters):
            mb = num[:, ar_b, :, f].sum(axis=0, **sum_kwargs)
            g_new = mb.argmax(axis=1)
            ma = num[ar_a, :, g_new, :].sum(axis=0, **sum_kwargs)
            f_new = ma.argmax(axis=1)
            sweeps += 1
            if g is not None and np.array_equal(f_new, f) and np.array_equal(g_new, g):
                break
            key = (f_new.tobytes(), g_new.tobytes())
            if key in seen:
                f, g = f_new, g_new
                break
            seen.add(key)
            f, g = f_new, g_new
        value = int(num[ar_a[:, None], ar_b[None, :], g[:, None], f[None, :]].sum(**sum_kwargs))
        if best_value is None or value > best_value:
            best_value = value
            best_pair = (tuple(int(v) for v in g), tuple(int(v) for v in f))
    assert best_value is not None and best_pair is not None
    return LocalBoundResult(
        value=Fraction(best_value, den),
        alice=DeterministicStrategy("alice", best_pair[0]),
        bob=DeterministicStrategy("bob", best_pair[1]),
        exact=False,
        strategies_scanned=sweeps,
        engine="seesaw",
        seconds=time.perf_counter() - start_time,
    )

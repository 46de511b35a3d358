"""Built-in nonlocal games and parallel composition with threshold winning."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import BellFunctional, RationalTensor, Scenario, _downcast, as_fraction
from .errors import BudgetExceeded, InvalidMargin, Unsupported
from .games import NonlocalGame, game_from_tensor

DEFAULT_COMPOSE_BUDGET = 1 << 25


def _uniform_game(scenario: Scenario, predicate: RationalTensor) -> NonlocalGame:
    """Assemble a game that asks every question with equal probability."""
    settings = scenario.sA * scenario.sB
    tensor = BellFunctional(
        scenario, RationalTensor(predicate.num.copy(), predicate.den * settings)
    )
    mu = RationalTensor(np.ones((scenario.sA, scenario.sB), dtype=np.int8), settings)
    return NonlocalGame(tensor, mu, predicate)


def chsh() -> NonlocalGame:
    """Two-input binary game won when a xor b equals x and y."""
    v = np.zeros((2, 2, 2, 2), dtype=np.int8)
    for x, y, a, b in np.ndindex(2, 2, 2, 2):
        v[x, y, a, b] = int(a ^ b == x * y)
    return _uniform_game(Scenario(2, 2, 2, 2), RationalTensor(v))


def cglmp(d: int) -> NonlocalGame:
    """d-output relative of chsh on two inputs per party, with graded acceptance.

    The referee accepts answers with a - b = (-1)^(x xor y) k + xy (mod d)
    with probability 1 - k/(d-1), so only the k = 0 condition is a sure win.
    """
    if d < 2:
        raise Unsupported("cglmp needs at least two outputs per party")
    scenario = Scenario(2, 2, d, d)
    items = []
    for x, y, a, b in np.ndindex(*scenario.shape):
        value = Fraction(0)
        for k in range(d):
            if (a - b) % d == ((-1) ** (x ^ y) * k + x * y) % d:
                value += 1 - Fraction(k, d - 1)
        items.append(value)
    return _uniform_game(scenario, RationalTensor.from_items(items, scenario.shape))


def cglmp_deterministic(d: int) -> NonlocalGame:
    """All-or-nothing variant of cglmp: win iff (a-b)(-1)^(x xor y) >= xy.

    The difference a - b is taken over the plain integers, not mod d.
    """
    if d < 2:
        raise Unsupported("cglmp_deterministic needs at least two outputs per party")
    scenario = Scenario(2, 2, d, d)
    v = np.zeros(scenario.shape, dtype=np.int8)
    for x, y, a, b in np.ndindex(*scenario.shape):
        v[x, y, a, b] = int((a - b) * (-1) ** (x ^ y) >= x * y)
    return _uniform_game(scenario, RationalTensor(v))


_I3322_BLOCKS = np.array(
    [
        [0, 2, 0, 1, 0, 1],
        [2, 2, 1, 0, 1, 0],
        [0, 1, 0, 2, 1, 0],
        [1, 0, 2, 2, 0, 1],
        [0, 1, 1, 0, 0, 0],
        [1, 0, 0, 1, 0, 0],
    ],
    dtype=np.int8,
)


def i3322_game() -> NonlocalGame:
    """Three-input binary game: differ, agree, or avoid (0,0), depending on the questions."""
    num = np.zeros((3, 3, 2, 2), dtype=np.int8)
    for x, y, a, b in np.ndindex(3, 3, 2, 2):
        num[x, y, a, b] = _I3322_BLOCKS[2 * x + a, 2 * y + b]
    return game_from_tensor(BellFunctional(Scenario(3, 3, 2, 2), RationalTensor(num, 10)))


def _parity_triple(index: int, parity: int) -> tuple[int, int, int]:
    t0, t1 = index & 1, (index >> 1) & 1
    return t0, t1, (t0 + t1 + parity) % 2


def magic_square() -> NonlocalGame:
    """Grid-filling game: even-parity rows and odd-parity columns must agree where they cross.

    Alice's answer encodes the first two cells of row x (the third is the
    parity fill), Bob's likewise for column y; they win when cell (x, y)
    comes out the same from both encodings.
    """
    scenario = Scenario(3, 3, 4, 4)
    v = np.zeros(scenario.shape, dtype=np.int8)
    for x, y, a, b in np.ndindex(*scenario.shape):
        v[x, y, a, b] = int(_parity_triple(a, 0)[y] == _parity_triple(b, 1)[x])
    return _uniform_game(scenario, RationalTensor(v))


@dataclass(frozen=True)
class ParallelGameSpec:
    """How many copies of a game to play at once and how many wins are required.

    The threshold may be given outright, or derived as ceil(n * (omega_l +
    delta)); omega_l is computed exactly when not supplied.
    """

    base: NonlocalGame
    copies: int
    threshold: int | None = None
    delta: Fraction | None = None
    omega_l: Fraction | None = None

    def resolve_threshold(self) -> int:
        if self.copies < 1:
            raise InvalidMargin("need at least one copy")
        if self.threshold is not None:
            if self.delta is not None:
                raise InvalidMargin("give an explicit threshold or a margin, not both")
            k = int(self.threshold)
        elif self.delta is None:
            raise InvalidMargin("either a threshold or a margin delta is required")
        else:
            omega_l = self.omega_l
            if omega_l is None:
                from .localbound import local_bound_exact

                omega_l = local_bound_exact(self.base.tensor).value
            k = math.ceil(self.copies * (as_fraction(omega_l) + as_fraction(self.delta)))
        if not 1 <= k <= self.copies:
            raise InvalidMargin(f"threshold {k} outside 1..{self.copies}")
        return k


def _outer_reshape(acc: np.ndarray, unit_shape: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(s * u for s, u in zip(acc.shape, unit_shape))


def parallel_compose(spec: ParallelGameSpec, budget: int = DEFAULT_COMPOSE_BUDGET) -> NonlocalGame:
    """Play `copies` instances simultaneously; win iff at least `threshold` succeed.

    Copy 0 is the most significant digit of the composed labels.  Bases with
    graded acceptance are handled exactly: the composed predicate is the
    upper tail of a sum of independent Bernoulli acceptances.
    """
    base, n = spec.base, spec.copies
    k = spec.resolve_threshold()
    s = base.scenario
    entries = (s.sA * s.sB * s.kA * s.kB) ** n
    if entries > budget:
        raise BudgetExceeded(f"{entries} composed tensor entries exceed budget {budget}")
    scenario = Scenario(s.sA**n, s.sB**n, s.kA**n, s.kB**n)

    mu_num = base.mu.num.astype(np.int64)
    acc_mu = mu_num
    for _ in range(n - 1):
        acc_mu = (acc_mu[:, None, :, None] * mu_num[None, :, None, :]).reshape(
            _outer_reshape(acc_mu, mu_num.shape)
        )
    mu = RationalTensor(_downcast(acc_mu), base.mu.den**n)

    if base.predicate.den == 1:
        predicate = RationalTensor((_compose_win_counts(base.predicate.num, n) >= k).astype(np.int8))
    else:
        predicate = _compose_graded(base.predicate, n, k)

    if mu.num.dtype != object and predicate.num.dtype != object:
        num = mu.num.astype(np.int64)[:, :, None, None] * predicate.num.astype(np.int64)
    else:
        num = np.multiply(
            mu.num.astype(object)[:, :, None, None], predicate.num.astype(object)
        )
    tensor = BellFunctional(scenario, RationalTensor(_downcast(num), mu.den * predicate.den))
    return NonlocalGame(tensor, mu, predicate)


def _compose_step(acc: np.ndarray, unit: np.ndarray, scale: int = 0) -> np.ndarray:
    """One outer step: add win counts, or append a digit when scale is set."""
    left = acc[:, None, :, None, :, None, :, None]
    right = unit[None, :, None, :, None, :, None, :]
    out = left * scale + right if scale else left + right
    return out.reshape(_outer_reshape(acc, unit.shape))


def _compose_win_counts(wins: np.ndarray, copies: int) -> np.ndarray:
    acc = wins.astype(np.int16)
    for _ in range(copies - 1):
        acc = _compose_step(acc, wins.astype(np.int16))
    return acc


def _compose_graded(predicate: RationalTensor, copies: int, threshold: int) -> RationalTensor:
    values = sorted(set(predicate.iter_fractions()))
    lookup = {v: i for i, v in enumerate(values)}
    radix = len(values)
    digits = np.array(
        [lookup[v] for v in predicate.iter_fractions()], dtype=np.int64
    ).reshape(predicate.num.shape)
    acc = digits
    for _ in range(copies - 1):
        acc = _compose_step(acc, digits, scale=radix)
    codes, positions = np.unique(acc.reshape(-1), return_inverse=True)
    memo: dict[tuple[int, ...], Fraction] = {}
    tails = []
    for code in codes.tolist():
        ds = []
        for _ in range(copies):
            code, digit = divmod(code, radix)
            ds.append(digit)
        key = tuple(sorted(ds))
        if key not in memo:
            memo[key] = poisson_binomial_tail([values[i] for i in key], threshold)
        tails.append(memo[key])
    den = math.lcm(*(t.denominator for t in tails))
    nums = np.array([t.numerator * (den // t.denominator) for t in tails], dtype=object)
    return RationalTensor(_downcast(nums[positions].reshape(acc.shape)), den)


def poisson_binomial_tail(probabilities, threshold: int) -> Fraction:
    """Exact P[X >= threshold] for X a sum of independent Bernoulli trials."""
    ps = [as_fraction(p) for p in probabilities]
    if any(p < 0 or p > 1 for p in ps):
        raise InvalidMargin("success probabilities must lie in [0, 1]")
    if not 0 <= threshold <= len(ps):
        raise InvalidMargin(f"threshold {threshold} outside 0..{len(ps)}")
    dist = [Fraction(1)]
    for p in ps:
        grown = [Fraction(0)] * (len(dist) + 1)
        for wins, weight in enumerate(dist):
            grown[wins] += weight * (1 - p)
            grown[wins + 1] += weight * p
        dist = grown
    return sum(dist[threshold:], Fraction(0))

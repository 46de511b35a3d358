"""Binomial p-values, concentration bounds, and single-shot repetition planning."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import gammaln, logsumexp

from .core import as_fraction
from .errors import InvalidMargin, Unsupported, VacuousBound

_LOG2 = math.log(2.0)

_ALPHABET_WARNING = (
    "the alphabet-size term in the concentration exponent is only cross-checked "
    "against two-output reference figures; published sample sizes for games with "
    "more outputs can differ from this reading by tens of percent"
)


def _check_probability(name: str, value: float) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise InvalidMargin(f"{name} must lie in [0, 1], got {value}")
    return value


def _log_binom_pmf(omega: float, rounds: int) -> np.ndarray:
    """Log binomial weights for k = 0..rounds, with exact handling of omega in {0,1}."""
    k = np.arange(rounds + 1, dtype=np.float64)
    if omega <= 0.0 or omega >= 1.0:
        sure = 0 if omega <= 0.0 else rounds
        out = np.full(rounds + 1, -np.inf)
        out[sure] = 0.0
        return out
    n = float(rounds)
    return (
        gammaln(n + 1.0)
        - gammaln(k + 1.0)
        - gammaln(n - k + 1.0)
        + k * math.log(omega)
        + (n - k) * math.log1p(-omega)
    )


def pvalue_lhv(omega_l, wins: int, rounds: int, exact: bool = False, log: bool = False):
    """Chance of at least `wins` victories in `rounds` rounds at success rate omega_l.

    The same binomial tail stays valid against strategies that adapt to
    past rounds, so it is the p-value of the observed win count.  The
    default path works in log space and is usable to n around 10^6; the
    exact path returns a Fraction and is meant for small n.
    """
    if rounds < 1:
        raise InvalidMargin("rounds must be positive")
    if not 0 <= wins <= rounds:
        raise InvalidMargin(f"wins {wins} outside 0..{rounds}")
    if exact:
        w = as_fraction(omega_l)
        _check_probability("omega_l", float(w))
        return sum(
            Fraction(math.comb(rounds, k)) * w**k * (1 - w) ** (rounds - k)
            for k in range(wins, rounds + 1)
        )
    w = _check_probability("omega_l", omega_l)
    if wins == 0:
        value = 0.0
    else:
        value = float(logsumexp(_log_binom_pmf(w, rounds)[wins:]))
    return value if log else math.exp(value)


def expected_pvalue(omega_l, omega_q, rounds: int, exact: bool = False):
    """Mean p-value over quantum play winning each round independently at rate omega_q."""
    if rounds < 1:
        raise InvalidMargin("rounds must be positive")
    if exact:
        wl, wq = as_fraction(omega_l), as_fraction(omega_q)
        _check_probability("omega_l", float(wl))
        _check_probability("omega_q", float(wq))
        if rounds == 1:
            return 1 - wq * (1 - wl)
        tails = [pvalue_lhv(wl, v, rounds, exact=True) for v in range(rounds + 1)]
        return sum(
            Fraction(math.comb(rounds, v)) * wq**v * (1 - wq) ** (rounds - v) * tails[v]
            for v in range(rounds + 1)
        )
    wl = _check_probability("omega_l", omega_l)
    wq = _check_probability("omega_q", omega_q)
    if rounds == 1:
        return 1.0 - wq * (1.0 - wl)
    local_pmf = np.exp(_log_binom_pmf(wl, rounds))
    local_tail = np.cumsum(local_pmf[::-1])[::-1]
    local_tail[0] = 1.0
    quantum_pmf = np.exp(_log_binom_pmf(wq, rounds))
    return float(np.dot(local_tail, quantum_pmf))


def pvalue_bound(chi, rounds: int):
    """Upper bound (1 - chi^2)^rounds on the expected p-value at gap chi."""
    if not 0 <= float(chi) <= 1:
        raise InvalidMargin("gap must lie in [0, 1]")
    return (1 - chi * chi) ** rounds


def kl_divergence(p: float, q: float) -> float:
    """Binary relative entropy D(p || q), in nats."""
    p = _check_probability("p", p)
    q = _check_probability("q", q)
    if p == q:
        return 0.0
    if q <= 0.0 or q >= 1.0:
        return math.inf
    total = 0.0
    if p > 0.0:
        total += p * math.log(p / q)
    if p < 1.0:
        total += (1.0 - p) * math.log((1.0 - p) / (1.0 - q))
    return total


def _rao_t(omega_l: float, delta: float, outputs_d: int) -> float:
    return (4 * delta**2) / (
        4 * delta**2
        + 75**2 * math.ceil(math.log2(outputs_d))
        + 75**2 * math.log2(1.0 / (omega_l + 2 * delta / 3))
    )


def rao_bound(omega_l, delta, outputs_d: int, rounds, log: bool = False) -> float:
    """Concentration bound on winning ceil(n(omega_l+delta)) of n parallel instances locally.

    Small margins can make the bound vacuous (>= 2) for every n, which is
    reported as VacuousBound; small n merely make it close to 2.
    """
    wl = _check_probability("omega_l", omega_l)
    d = float(delta)
    if d <= 0 or wl + d > 1 + 1e-15:
        raise InvalidMargin("need 0 < delta and omega_l + delta <= 1")
    if outputs_d < 2:
        raise InvalidMargin("outputs_d must be at least 2")
    t = _rao_t(wl, d, outputs_d)
    ratio = (wl + d - t) / (wl + 2 * d / 3)
    if ratio <= 1.0:
        raise VacuousBound(f"concentration bound vacuous: log argument {ratio} <= 1")
    log_bound = _LOG2 - rounds * t * math.log(ratio)
    return log_bound if log else math.exp(log_bound)


def chernoff_quantum(omega_l, delta, omega_q, rounds) -> float:
    """Lower bound on quantum play winning at least n(omega_l+delta) of n instances."""
    wl = _check_probability("omega_l", omega_l)
    wq = _check_probability("omega_q", omega_q)
    d = float(delta)
    if not 0 < d < wq - wl:
        raise InvalidMargin("delta must lie strictly inside the gap")
    return -math.expm1(-rounds * kl_divergence(wl + d, wq))


@dataclass(frozen=True)
class GameSummary:
    """Scalar data about a base game, enough for repetition planning."""

    omega_l: Fraction | float
    omega_q: float
    outputs_d: int
    local_dim: int | None = None

    def validate(self) -> None:
        wl = _check_probability("omega_l", self.omega_l)
        wq = _check_probability("omega_q", self.omega_q)
        if wl > wq:
            raise InvalidMargin("omega_l must not exceed omega_q")
        if self.outputs_d < 2:
            raise InvalidMargin("outputs_d must be at least 2")
        if self.local_dim is not None and self.local_dim < 2:
            raise InvalidMargin("local_dim must be at least 2")


@dataclass(frozen=True)
class ShotPlan:
    """Sizing of a threshold-repeated game for a single-shot rejection."""

    rounds: int
    delta: float
    threshold: int
    rao_bound: float
    rao_bound_log10: float
    quantum_success: float
    dim_exponent: float | None
    warnings: tuple[str, ...] = ()


def plan_single_shot(summary: GameSummary, delta, target_p, target_q=None) -> ShotPlan:
    """Smallest repetition count whose local win-enough bound beats target_p.

    The concentration bound is monotone in n, so the minimal n comes from a
    doubling bracket plus binary search on its log.  If target_q is given,
    n is raised until the quantum success chance clears it too.
    """
    summary.validate()
    wl, wq, d = float(summary.omega_l), float(summary.omega_q), float(delta)
    if not 0 < d <= wq - wl:
        raise InvalidMargin("delta must lie inside the gap")
    warnings = []
    if summary.outputs_d > 2:
        warnings.append(_ALPHABET_WARNING)

    def log_rao(n: int) -> float:
        return rao_bound(wl, d, summary.outputs_d, n, log=True)

    if target_p >= 1.0:
        warnings.append("target p-value is vacuous; a single instance suffices")
        rounds = 1
    else:
        if target_p <= 0.0:
            raise InvalidMargin("target p-value must be positive")
        log_target = math.log(target_p)
        hi = 1
        while log_rao(hi) > log_target:
            hi *= 2
            if hi > 1 << 62:
                raise VacuousBound("no feasible repetition count below 2^62")
        lo = max(1, hi // 2)
        while lo < hi:
            mid = (lo + hi) // 2
            if log_rao(mid) <= log_target:
                hi = mid
            else:
                lo = mid + 1
        rounds = lo

    # A perfect quantum strategy clears any threshold <= rounds with certainty;
    # everything short of that goes through the Chernoff rate.
    rate = kl_divergence(wl + d, wq)
    quantum_success = 1.0 if wq == 1.0 else -math.expm1(-rounds * rate)
    if target_q is not None:
        if not 0.0 < target_q < 1.0:
            raise InvalidMargin("target quantum success must lie in (0, 1)")
        if wq < 1.0 and rate == 0.0:
            raise VacuousBound("the success bound is vacuous at a full-gap margin")
        if rate > 0 and math.isfinite(rate):
            rounds = max(rounds, math.ceil(-math.log1p(-target_q) / rate))
            quantum_success = -math.expm1(-rounds * rate)

    log_bound = log_rao(rounds)
    threshold = math.ceil(rounds * (as_fraction(summary.omega_l) + as_fraction(delta)))
    dim_exponent = (
        rounds * math.log2(summary.local_dim) if summary.local_dim is not None else None
    )
    return ShotPlan(
        rounds=rounds,
        delta=d,
        threshold=int(threshold),
        rao_bound=math.exp(log_bound),
        rao_bound_log10=log_bound / math.log(10.0),
        quantum_success=quantum_success,
        dim_exponent=dim_exponent,
        warnings=tuple(warnings),
    )


@dataclass(frozen=True)
class KvBounds:
    """Bound guarantees for the noisy-hypercube game at dimension 2^exponent."""

    exponent: int
    eta: float
    omega_l_upper: float
    omega_q_lower: float


def kv_bounds(exponent: int, eta: float | None = None) -> KvBounds:
    """Local/Tsirelson control at dimension d = 2^exponent, noise parameter eta.

    With the default eta = ln(ln(d^(1/4)))/ln(d) the guarantees simplify to
    omega_l <= 1/ln(d^(1/4)) and omega_q >= 1 - ln(ln(d^(1/4)))/ln(d^(1/4)).
    """
    if exponent < 6:
        raise Unsupported("the construction needs dimension at least 2^6")
    ln_d = exponent * _LOG2
    ln_quarter = ln_d / 4.0
    if eta is None:
        eta = math.log(ln_quarter) / ln_d
        return KvBounds(
            exponent,
            eta,
            1.0 / ln_quarter,
            1.0 - math.log(ln_quarter) / ln_quarter,
        )
    if not 0.0 <= eta <= 0.5:
        raise InvalidMargin("noise parameter must lie in [0, 1/2]")
    return KvBounds(
        exponent,
        float(eta),
        math.exp(-eta / (1.0 - eta) * ln_d),
        (1.0 - 2.0 * eta) ** 2,
    )


@dataclass(frozen=True)
class KvPlan:
    exponent: int
    bounds: KvBounds


def kv_plan(target_p: float) -> KvPlan:
    """Least dimension exponent whose local-bound guarantee beats target_p."""
    if not 0.0 < target_p < 1.0:
        raise InvalidMargin("target p-value must lie in (0, 1)")
    exponent = max(6, math.ceil(4.0 / (_LOG2 * target_p)))
    return KvPlan(exponent, kv_bounds(exponent))

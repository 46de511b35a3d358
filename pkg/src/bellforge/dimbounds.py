"""Dimension-dependent bounds on the gap measure Xi = 1/(1 - chi)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InternalError, InvalidMargin, Unsupported
from .shotstats import GameSummary, kl_divergence, rao_bound

_EULER_GAMMA = float(np.euler_gamma)

K_R3_LOWER = 1.4359
K_R3_UPPER = 1.4644


@dataclass(frozen=True)
class GapMeasure:
    """Xi = 1/(1 - chi) together with the plain ratio omega_q/omega_l."""

    xi: Fraction | float
    lv: Fraction | float


def xi_of_game(omega_l, omega_q) -> GapMeasure:
    """Gap measure of a game; Xi <= lv always, with equality iff omega_q = 1."""
    wl, wq = float(omega_l), float(omega_q)
    if not 0.0 <= wl <= wq <= 1.0:
        raise InvalidMargin("need 0 <= omega_l <= omega_q <= 1")
    try:
        xi = 1 / (1 - (omega_q - omega_l))
    except ZeroDivisionError:
        xi = math.inf
    lv = math.inf if wl == 0.0 else omega_q / omega_l
    if float(xi) > float(lv) * (1 + 1e-12):
        raise InternalError(f"xi {xi} exceeds the violation ratio {lv}")
    return GapMeasure(xi, lv)


def harmonic(d: int) -> float:
    """H(d) = sum_{i=1}^{d} 1/i, switching to the asymptotic series above 10^6."""
    if d < 1:
        raise Unsupported("harmonic numbers need d >= 1")
    if d <= 1_000_000:
        return math.fsum(1.0 / i for i in range(1, d + 1))
    return math.log(d) + _EULER_GAMMA + 1.0 / (2.0 * d)


def lhv_fidelity(d: int, projective: bool = False) -> float:
    """Isotropic-noise level at which d-dimensional correlations turn classical."""
    if d < 2:
        raise Unsupported("dimension must be at least 2")
    if projective:
        return ((d + 1) * harmonic(d) - d) / d**2
    return (1.0 + ((d - 1) / d) ** d * (3.0 * d - 1.0)) / d**2


def xi_upper(d: int, projective: bool = False) -> float:
    """Largest Xi reachable by d-dimensional systems; reciprocal of lhv_fidelity."""
    return 1.0 / lhv_fidelity(d, projective)


def xi_upper_relaxed(d: int, projective: bool = False) -> float:
    """Looser closed forms dominating xi_upper: (e/3)d, or d/(ln d + gamma - 1)."""
    if d < 2:
        raise Unsupported("dimension must be at least 2")
    if projective:
        return d / (math.log(d) + _EULER_GAMMA - 1.0)
    return math.e / 3.0 * d


def lv_upper(d: int, functional: bool = False, projective: bool = False) -> float:
    """Largest-violation bound; the functional variant doubles the game bound minus one."""
    bound = xi_upper(d, projective)
    return 2.0 * bound - 1.0 if functional else bound


@dataclass(frozen=True)
class XorBound:
    """Xi bound for binary-output parity games, parameterised by a Grothendieck constant."""

    order: int
    K: float
    value: float


def xor_bounds(d: int, K: float | None = None, maxent: bool = False) -> XorBound:
    """Xi bound 2/(1 + 1/K) for parity games on d-dimensional systems.

    The relevant Grothendieck constant has order d^2 - 1 when play is
    restricted to the maximally entangled state and 2d^2 otherwise; only
    the order-3 constant ships built in (its proven upper end).
    """
    if d < 2:
        raise Unsupported("dimension must be at least 2")
    order = d * d - 1 if maxent else 2 * d * d
    if K is None:
        if order != 3:
            raise Unsupported(f"no built-in Grothendieck constant of order {order}")
        K = K_R3_UPPER
    K = float(K)
    if K <= 1.0:
        raise InvalidMargin("Grothendieck constants exceed 1")
    return XorBound(order, K, 2.0 / (1.0 + 1.0 / K))


def xi_lower_parallel(base: GameSummary, rounds: int, delta, log: bool = False) -> float:
    """Xi guaranteed by threshold-repeating a gapped base game n times.

    Reciprocal of (quantum failure chance + local win-enough chance), each
    term carried in log space so huge n never underflows.
    """
    base.validate()
    wl, wq, d = float(base.omega_l), float(base.omega_q), float(delta)
    if not 0 < d < wq - wl:
        raise InvalidMargin("delta must lie strictly inside the gap")
    log_fail = -(rounds * kl_divergence(wl + d, wq)) if rounds else 0.0
    log_local = rao_bound(wl, d, base.outputs_d, rounds, log=True)
    log_total = float(np.logaddexp(log_fail, log_local))
    if log:
        return -log_total
    try:
        return math.exp(-log_total)
    except OverflowError:
        return math.inf


def xi_lower_kv(exponent: int) -> float:
    """Xi guaranteed by the noisy-hypercube family at dimension 2^exponent."""
    if exponent < 6:
        raise Unsupported("the construction needs dimension at least 2^6")
    ln_quarter = exponent * math.log(2.0) / 4.0
    return ln_quarter / (math.log(ln_quarter) + 1.0)


@dataclass(frozen=True)
class XiReport:
    """All Xi bounds applicable at one local dimension."""

    dimension: int
    upper_povm: float
    upper_projective: float
    upper_xor: float | None = None
    upper_xor_maxent: float | None = None
    lower_parallel: float | None = None
    lower_kv: float | None = None


def xi_report(
    d: int,
    K: float | None = None,
    parallel: tuple[GameSummary, int, float] | None = None,
    use_kv: bool = False,
) -> XiReport:
    """Assemble upper and lower Xi bounds at dimension d and cross-check them."""
    upper_povm = xi_upper(d, projective=False)
    upper_projective = xi_upper(d, projective=True)
    upper_xor = upper_xor_maxent = None
    if K is not None or d == 2:
        upper_xor = xor_bounds(d, K).value if K is not None else None
        try:
            upper_xor_maxent = xor_bounds(d, K, maxent=True).value
        except Unsupported:
            upper_xor_maxent = None
    lower_parallel = None
    if parallel is not None:
        summary, rounds, delta = parallel
        lower_parallel = xi_lower_parallel(summary, rounds, delta)
    lower_kv = None
    if use_kv:
        if d < 2 or d & (d - 1):
            raise Unsupported("the hypercube lower bound needs a power-of-two dimension")
        lower_kv = xi_lower_kv(d.bit_length() - 1)
    # Parity-game bounds constrain only parity games, so the cross-check pits
    # the constructive lower bounds against the measurement-class bounds alone.
    universal = min(upper_povm, upper_projective)
    for low in (lower_parallel, lower_kv):
        if low is not None and low > universal * (1 + 1e-9):
            raise InternalError(f"lower bound {low} exceeds the upper bound {universal}")
    return XiReport(
        d, upper_povm, upper_projective, upper_xor, upper_xor_maxent, lower_parallel, lower_kv
    )

"""Maximum-gap normalisation of Bell functionals via exact LP.

Adding no-signalling basis elements to a functional changes its per-setting
spread g = sum_xy (max_ab - min_ab) without changing values on behaviours.
Stage 1 minimises g; stage 2 maximises the offset alpha = sum_xy (-min) on
the optimal face (equivalently minimises sum_xy max); a final lexicographic
pass pins gamma when the face is not a single point.  The stage-1 optimum is
certified by a pair of per-setting distributions (p, q) with zero pairing
against every basis element and <M, p - q> = g.
"""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import (
    BellFunctional,
    RationalTensor,
    as_fraction,
    dump_json,
    format_rational,
)
from .errors import DegenerateFunctional, InternalError
from .exactlp import LpSolution, SparseCol, solve_standard_form
from .games import NonlocalGame, to_game
from .nsspace import NsBasis, build_basis

_ONE = Fraction(1)
_ZERO = Fraction(0)


@dataclass(frozen=True)
class DualCertificate:
    """Optimality witness for the minimal gap.

    p and q are per-setting distributions with <S_i, p - q> = 0 for every
    basis element and <M, p - q> = g; any feasible gamma has spread at least
    <M, p - q>, so matching it proves optimality.
    """

    p: RationalTensor
    q: RationalTensor
    value: Fraction
    verified: bool

    def canonical_json(self) -> dict:
        def entries(tensor: RationalTensor) -> list:
            return [
                {"i": [int(k) for k in idx], "v": format_rational(Fraction(int(v), tensor.den))}
                for idx, v in np.ndenumerate(tensor.num)
                if v
            ]

        return {"p": entries(self.p), "q": entries(self.q), "value": format_rational(self.value)}

    @property
    def digest(self) -> str:
        return hashlib.sha256(dump_json(self.canonical_json()).encode()).hexdigest()


@dataclass(frozen=True)
class GapReport:
    functional: BellFunctional
    gamma: tuple[Fraction, ...]
    g: Fraction
    alpha: Fraction
    game: NonlocalGame
    certificate: DualCertificate
    ns_bound: Fraction | None
    lex_passes: int
    pivots: int
    seconds: float

    def optimized_functional(self) -> BellFunctional:
        return _apply_gamma(self.functional, build_basis(self.functional.scenario), self.gamma)


@dataclass(frozen=True)
class BoundsReport:
    """Game-level bounds derived from functional-level bounds via (K+alpha)/g."""

    omega_local: Fraction
    omega_quantum: float | Fraction
    chi: float | Fraction


def bounds_from_report(report: GapReport, local_bound, tsirelson) -> BoundsReport:
    omega_local = (as_fraction(local_bound) + report.alpha) / report.g
    if isinstance(tsirelson, (int, Fraction)):
        omega_quantum: float | Fraction = (as_fraction(tsirelson) + report.alpha) / report.g
        chi: float | Fraction = omega_quantum - omega_local
    else:
        omega_quantum = (float(tsirelson) + float(report.alpha)) / float(report.g)
        chi = omega_quantum - float(omega_local)
    return BoundsReport(omega_local, omega_quantum, chi)


def _apply_gamma(
    functional: BellFunctional, basis: NsBasis, gamma: tuple[Fraction, ...]
) -> BellFunctional:
    total = functional.coefficients
    for i, coeff in enumerate(gamma):
        if coeff:
            total = total + basis.element(i).scale(coeff)
    return BellFunctional(functional.scenario, total)


def _spread_and_alpha(functional: BellFunctional) -> tuple[Fraction, Fraction]:
    maxes, mins = functional.coefficients.setting_extrema()
    den = functional.coefficients.den
    return (
        Fraction(int(maxes.sum()) - int(mins.sum()), den),
        Fraction(-int(mins.sum()), den),
    )


class _GapLp:
    """Shared column structure for all three stages.

    Rows: gamma rows 0..N-1, then one row per setting for u (upper envelope)
    and one per setting for l (lower envelope).  Columns 0..K-1 are the
    upper-envelope duals (the certificate's p), columns K..2K-1 the lower
    ones (q); stages 2 and 3 append spread/beta-cap/fixing columns.
    """

    def __init__(self, functional: BellFunctional, basis: NsBasis):
        scenario = functional.scenario
        self.basis = basis
        self.n_basis = basis.size
        self.n_settings = scenario.sA * scenario.sB
        self.kk = scenario.kA * scenario.kB
        self.n_entries = scenario.n_entries
        self.m = self.n_basis + 2 * self.n_settings
        self.mvals = [Fraction(int(v), functional.coefficients.den)
                      for v in functional.coefficients.num.flat]

        touching: list[list[tuple[int, int]]] = [[] for _ in range(self.n_entries)]
        for i in range(basis.size):
            for x, y, a, b, sign in basis.entries(i):
                flat = ((x * scenario.sB + y) * scenario.kA + a) * scenario.kB + b
                touching[flat].append((i, sign))

        self.up_cols: list[SparseCol] = []
        self.lo_cols: list[SparseCol] = []
        for e in range(self.n_entries):
            setting = e // self.kk
            self.up_cols.append(
                [(i, Fraction(-s)) for i, s in touching[e]]
                + [(self.n_basis + setting, _ONE)]
            )
            self.lo_cols.append(
                [(i, Fraction(s)) for i, s in touching[e]]
                + [(self.n_basis + self.n_settings + setting, -_ONE)]
            )
        self.costs = [-v for v in self.mvals] + list(self.mvals)

    def u_rows(self) -> range:
        return range(self.n_basis, self.n_basis + self.n_settings)

    def l_rows(self) -> range:
        return range(self.n_basis + self.n_settings, self.m)

    def solve(
        self,
        b: list[Fraction],
        extra_cols: list[SparseCol],
        extra_costs: list[Fraction],
        hint: list[int] | None,
        presolve: bool,
    ) -> LpSolution:
        cols = self.up_cols + self.lo_cols + extra_cols
        costs = self.costs + extra_costs
        solution = solve_standard_form(costs, cols, b, self.m, presolve=presolve, basis_hint=hint)
        if solution.status != "optimal":
            raise InternalError(f"gap LP unexpectedly {solution.status}")
        return solution


def optimize_gap(
    functional: BellFunctional,
    basis: NsBasis | None = None,
    presolve: bool = True,
    lexicographic: bool = True,
    compute_ns_bound: bool = True,
) -> GapReport:
    """Find gamma minimising the spread, resolve ties, certify, and package.

    Raises DegenerateFunctional when the minimal spread is zero, i.e. the
    functional is a combination of translations and no-signalling terms.
    """
    start = time.perf_counter()
    scenario = functional.scenario
    if basis is None:
        basis = build_basis(scenario)
    lp = _GapLp(functional, basis)
    nb, ns = lp.n_basis, lp.n_settings

    # Stage 1: b encodes the objective sum(u) - sum(l).
    b1 = [_ZERO] * nb + [_ONE] * ns + [-_ONE] * ns
    stage1 = lp.solve(b1, [], [], None, presolve)
    g = -stage1.objective
    if g == 0:
        raise DegenerateFunctional(
            "minimal spread is zero: functional is trivial on no-signalling behaviours"
        )
    certificate = _build_certificate(functional, basis, lp, stage1, g)

    # Stage 2: minimise sum(u) on the face f(gamma) = g; alpha = g - opt.
    spread_col: SparseCol = [(r, -_ONE) for r in lp.u_rows()] + [(r, _ONE) for r in lp.l_rows()]
    b2 = [_ZERO] * nb + [_ONE] * ns + [_ZERO] * ns
    stage2 = lp.solve(b2, [spread_col], [g], list(stage1.basis), presolve)
    beta_star = -stage2.objective
    alpha = g - beta_star

    # Row multipliers enter the corrected functional with flipped sign.
    gamma = tuple(-v for v in stage2.y[:nb])
    lex_passes = 0
    pivots = stage1.pivots + stage2.pivots
    g_input, alpha_input = _spread_and_alpha(functional)
    if g_input == g and alpha_input == alpha:
        # The input already attains the optimum: leave it unchanged.
        gamma = (_ZERO,) * nb
    elif lexicographic and nb > 0 and stage2.degenerate:
        gamma, lex_passes, lex_pivots = _lexicographic_gamma(
            lp, g, beta_star, spread_col, stage2, presolve
        )
        pivots += lex_pivots

    optimized = _apply_gamma(functional, basis, gamma)
    g_check, alpha_check = _spread_and_alpha(optimized)
    if g_check != g or alpha_check != alpha:
        raise InternalError("stage consistency failed: recomputed spread or offset differs")

    game, alpha_game, g_game = to_game(optimized)
    if g_game != g or alpha_game != alpha:
        raise InternalError("normal form disagrees with LP optimum")

    ns_bound = nonsignalling_bound(game.tensor, basis, presolve) if compute_ns_bound else None
    return GapReport(
        functional=functional,
        gamma=gamma,
        g=g,
        alpha=alpha,
        game=game,
        certificate=certificate,
        ns_bound=ns_bound,
        lex_passes=lex_passes,
        pivots=pivots,
        seconds=time.perf_counter() - start,
    )


def _lexicographic_gamma(
    lp: _GapLp,
    g: Fraction,
    beta_star: Fraction,
    spread_col: SparseCol,
    stage2: LpSolution,
    presolve: bool,
) -> tuple[tuple[Fraction, ...], int, int]:
    """Lexicographically smallest gamma on the optimal face.

    Each step minimises one coordinate subject to the face constraints and
    the previously fixed coordinates (free dual columns).  A nondegenerate
    step certifies the remaining coordinates are already unique.
    """
    nb, ns = lp.n_basis, lp.n_settings
    beta_col: SparseCol = [(r, -_ONE) for r in lp.u_rows()]
    fixed: list[Fraction] = []
    hint = list(stage2.basis)
    pivots = 0
    last: LpSolution | None = None
    for t in range(nb):
        extra_cols = [spread_col, beta_col]
        extra_costs = [g, beta_star]
        for s, value in enumerate(fixed):
            extra_cols.append([(s, _ONE)])
            extra_costs.append(-value)
            extra_cols.append([(s, -_ONE)])
            extra_costs.append(value)
        b = [_ZERO] * lp.m
        b[t] = _ONE
        solution = lp.solve(b, extra_cols, extra_costs, hint, presolve)
        pivots += solution.pivots
        fixed.append(-solution.objective)
        hint = list(solution.basis)
        last = solution
        if not solution.degenerate:
            remaining = [-v for v in solution.y[t + 1: nb]]
            return tuple(fixed + remaining), t + 1, pivots
    assert last is not None
    return tuple(fixed), nb, pivots


def _build_certificate(
    functional: BellFunctional,
    basis: NsBasis,
    lp: _GapLp,
    stage1: LpSolution,
    g: Fraction,
) -> DualCertificate:
    shape = functional.scenario.shape
    k = lp.n_entries
    p = RationalTensor.from_items(stage1.x[:k], shape)
    q = RationalTensor.from_items(stage1.x[k: 2 * k], shape)
    verified = verify_certificate(functional, basis, p, q, g)
    if not verified:
        raise InternalError("stage-1 dual certificate failed exact verification")
    return DualCertificate(p=p, q=q, value=g, verified=True)


def verify_certificate(
    functional: BellFunctional,
    basis: NsBasis,
    p: RationalTensor,
    q: RationalTensor,
    g: Fraction,
) -> bool:
    """Exact re-check of the optimality certificate, independent of the LP."""
    scenario = functional.scenario
    for tensor in (p, q):
        if tensor.num.dtype == object:
            if any(v < 0 for v in tensor.num.flat):
                return False
        elif tensor.num.min() < 0:
            return False
        sums = tensor.num.reshape(scenario.sA, scenario.sB, -1).sum(axis=2)
        if not np.all(sums == tensor.den):
            return False
    diff_entries = [pv - qv for pv, qv in zip(p.iter_fractions(), q.iter_fractions())]
    for i in range(basis.size):
        pairing = _ZERO
        for x, y, a, b, sign in basis.entries(i):
            flat = ((x * scenario.sB + y) * scenario.kA + a) * scenario.kB + b
            pairing += sign * diff_entries[flat]
        if pairing != 0:
            return False
    mvals = [Fraction(int(v), functional.coefficients.den)
             for v in functional.coefficients.num.flat]
    value = sum(m * d for m, d in zip(mvals, diff_entries))
    return value == g


def nonsignalling_bound(
    functional: BellFunctional, basis: NsBasis | None = None, presolve: bool = True
) -> Fraction:
    """Maximum of the functional over all no-signalling behaviours (exact LP)."""
    scenario = functional.scenario
    if basis is None:
        basis = build_basis(scenario)
    n_settings = scenario.sA * scenario.sB
    kk = scenario.kA * scenario.kB
    m = n_settings + basis.size
    touching: list[list[tuple[int, int]]] = [[] for _ in range(scenario.n_entries)]
    for i in range(basis.size):
        for x, y, a, b, sign in basis.entries(i):
            flat = ((x * scenario.sB + y) * scenario.kA + a) * scenario.kB + b
            touching[flat].append((i, sign))
    cols: list[SparseCol] = []
    for e in range(scenario.n_entries):
        entries: SparseCol = [(e // kk, _ONE)]
        entries += [(n_settings + i, Fraction(s)) for i, s in touching[e]]
        cols.append(sorted(entries))
    costs = [Fraction(-int(v), functional.coefficients.den)
             for v in functional.coefficients.num.flat]
    b = [_ONE] * n_settings + [_ZERO] * basis.size
    solution = solve_standard_form(costs, cols, b, m, presolve=presolve)
    if solution.status != "optimal":
        raise InternalError(f"no-signalling bound LP unexpectedly {solution.status}")
    return -solution.objective

"""Exact rational linear programming.

Problems are given in standard form (min c.z subject to A z = b, z >= 0)
with sparse columns.  A floating-point solve proposes an optimal basis; the
basis is then verified and, if needed, corrected by exact simplex pivoting
in Fraction arithmetic, so the result is exact no matter how rough the
float guess was.  Without a usable guess the solver falls back to a full
exact two-phase run.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import linprog as _float_linprog

from .errors import InternalError

# A sparse column: (row, value) pairs with strictly increasing rows.
SparseCol = list[tuple[int, Fraction]]

_ZERO = Fraction(0)
_MAX_PIVOTS = 20000


@dataclass
class LpSolution:
    status: str                      # "optimal", "infeasible" or "unbounded"
    objective: Fraction | None
    x: list[Fraction] | None         # full primal vector (standard-form variables)
    y: list[Fraction] | None         # row multipliers; solve the dual exactly
    basis: list[int] = field(default_factory=list)
    degenerate: bool = False         # some basic variable sits at zero
    pivots: int = 0


class _Tableau:
    """Revised simplex state: basis, exact inverse, basic values."""

    def __init__(self, m: int, cols: list[SparseCol], b: list[Fraction]):
        self.m = m
        self.cols = cols
        self.b = b
        self.basis: list[int] = []
        self.binv: list[list[Fraction]] = []
        self.xb: list[Fraction] = []
        self.pivots = 0

    def set_basis(self, basis: list[int]) -> bool:
        """Install a basis by exact Gauss-Jordan; False when singular."""
        m = self.m
        work = [[_ZERO] * m + [Fraction(i == j) for i in range(m)] for j in range(m)]
        for pos, col in enumerate(basis):
            for row, val in self.cols[col]:
                work[row][pos] = val
        for col in range(m):
            pivot = next((r for r in range(col, m) if work[r][col] != 0), None)
            if pivot is None:
                return False
            if pivot != col:
                work[col], work[pivot] = work[pivot], work[col]
            inv = 1 / work[col][col]
            work[col] = [v * inv for v in work[col]]
            for r in range(m):
                if r != col and work[r][col] != 0:
                    f = work[r][col]
                    work[r] = [v - f * w for v, w in zip(work[r], work[col])]
        self.basis = list(basis)
        self.binv = [row[m:] for row in work]
        self.xb = [sum(row[i] * self.b[i] for i in range(m) if self.b[i]) for row in self.binv]
        return True

    def column_through_binv(self, j: int) -> list[Fraction]:
        col = self.cols[j]
        return [sum(row[r] * v for r, v in col) for row in self.binv]

    def multipliers(self, costs: list[Fraction]) -> list[Fraction]:
        m = self.m
        cb = [costs[j] for j in self.basis]
        return [sum(cb[i] * self.binv[i][k] for i in range(m) if cb[i]) for k in range(m)]

    def pivot(self, entering: int, leaving_pos: int, direction: list[Fraction]):
        m = self.m
        r = leaving_pos
        pivot = direction[r]
        inv = 1 / pivot
        self.binv[r] = [v * inv for v in self.binv[r]]
        self.xb[r] *= inv
        for i in range(m):
            if i != r and direction[i] != 0:
                d = direction[i]
                self.binv[i] = [v - d * w for v, w in zip(self.binv[i], self.binv[r])]
                self.xb[i] -= d * self.xb[r]
        self.basis[r] = entering
        self.pivots += 1

    def run(self, costs: list[Fraction], allowed: list[bool]) -> str:
        """Pivot to optimality for the given costs.  Dantzig rule with a
        switch to Bland's rule after a degenerate stall, which guarantees
        termination."""
        m = self.m
        bland = False
        stall = 0
        while True:
            if self.pivots > _MAX_PIVOTS:
                raise InternalError("simplex pivot limit exceeded")
            y = self.multipliers(costs)
            entering = -1
            best = _ZERO
            for j, col in enumerate(self.cols):
                if not allowed[j]:
                    continue
                reduced = costs[j] - sum(y[r] * v for r, v in col)
                if reduced < 0:
                    if bland:
                        entering = j
                        break
                    if reduced < best:
                        best = reduced
                        entering = j
            if entering < 0:
                return "optimal"
            direction = self.column_through_binv(entering)
            leaving = -1
            best_ratio = None
            for i in range(m):
                if direction[i] > 0:
                    ratio = self.xb[i] / direction[i]
                    if (
                        best_ratio is None
                        or ratio < best_ratio
                        or (ratio == best_ratio and self.basis[i] < self.basis[leaving])
                    ):
                        best_ratio = ratio
                        leaving = i
            if leaving < 0:
                return "unbounded"
            if best_ratio == 0:
                stall += 1
                if stall > 2 * m + 10:
                    bland = True
            else:
                stall = 0
            self.pivot(entering, leaving, direction)


def solve_standard_form(
    costs: list[Fraction],
    cols: list[SparseCol],
    b: list[Fraction],
    m: int,
    presolve: bool = True,
    basis_hint: list[int] | None = None,
) -> LpSolution:
    """Exact optimum of min c.z, A z = b, z >= 0 given by sparse columns."""
    n = len(cols)
    if len(costs) != n or len(b) != m:
        raise InternalError("inconsistent LP dimensions")
    costs = [Fraction(c) for c in costs]
    b = [Fraction(v) for v in b]

    tableau = _Tableau(m, list(cols), b)
    allowed = [True] * n

    def _try(hint: list[int] | None) -> bool:
        if hint is None or len(hint) != m or len(set(hint)) != m:
            return False
        return tableau.set_basis(hint) and all(v >= 0 for v in tableau.xb)

    started = _try(basis_hint)
    if not started and presolve:
        started = _try(_float_basis_hint(costs, cols, b, m))
    if not started:
        status = _phase_one(tableau, allowed)
        if status != "feasible":
            return LpSolution(status="infeasible", objective=None, x=None, y=None)

    n_total = len(tableau.cols)
    allowed = allowed + [False] * (n_total - n)
    full_costs = costs + [_ZERO] * (n_total - n)
    status = tableau.run(full_costs, allowed)
    if status == "unbounded":
        return LpSolution(status="unbounded", objective=None, x=None, y=None)

    x = [_ZERO] * n
    degenerate = False
    for pos, j in enumerate(tableau.basis):
        if j < n:
            x[j] = tableau.xb[pos]
        if tableau.xb[pos] == 0:
            degenerate = True
        if j >= n and tableau.xb[pos] != 0:
            raise InternalError("artificial variable basic at a nonzero level")
    y = tableau.multipliers(full_costs)
    objective = sum(costs[j] * x[j] for j in range(n) if x[j])
    return LpSolution(
        status="optimal",
        objective=objective,
        x=x,
        y=y,
        basis=list(tableau.basis),
        degenerate=degenerate,
        pivots=tableau.pivots,
    )


def _phase_one(tableau: _Tableau, allowed: list[bool]) -> str:
    """Append artificial columns, drive their sum to zero, drop them."""
    m, n = tableau.m, len(tableau.cols)
    signs = [1 if v >= 0 else -1 for v in tableau.b]
    art_cols: list[SparseCol] = [[(r, Fraction(signs[r]))] for r in range(m)]
    tableau.cols = tableau.cols + art_cols
    tableau.basis = list(range(n, n + m))
    tableau.binv = [[Fraction(signs[i] if i == j else 0) for i in range(m)] for j in range(m)]
    tableau.xb = [v * signs[i] for i, v in enumerate(tableau.b)]
    phase_costs = [_ZERO] * n + [Fraction(1)] * m
    phase_allowed = allowed + [False] * m
    status = tableau.run(phase_costs, phase_allowed)
    if status != "optimal":
        raise InternalError("phase-one subproblem cannot be unbounded")
    if sum(tableau.xb[i] for i, j in enumerate(tableau.basis) if j >= n) > 0:
        return "infeasible"
    # Pivot any leftover artificials (basic at zero) out of the basis.
    for pos in range(m):
        if tableau.basis[pos] >= n:
            replaced = False
            for j in range(n):
                if allowed[j] and j not in tableau.basis:
                    direction = tableau.column_through_binv(j)
                    if direction[pos] != 0:
                        tableau.pivot(j, pos, direction)
                        replaced = True
                        break
            if not replaced:
                raise InternalError("redundant constraint row; expected independent rows")
    return "feasible"


def _float_basis_hint(
    costs: list[Fraction], cols: list[SparseCol], b: list[Fraction], m: int
) -> list[int] | None:
    """Ask a float solver for the optimum and read off a candidate basis."""
    n = len(cols)
    if n == 0 or m == 0:
        return None
    dense = np.zeros((m, n))
    for j, col in enumerate(cols):
        for r, v in col:
            dense[r, j] = float(v)
    try:
        result = _float_linprog(
            [float(c) for c in costs],
            A_eq=dense,
            b_eq=[float(v) for v in b],
            bounds=(0, None),
            method="highs",
        )
    except ValueError:
        return None
    if not result.success:
        return None
    order = [int(j) for j in np.argsort(-result.x, kind="stable") if result.x[j] > 1e-9]
    picked = set(order)
    order += [j for j in range(n) if j not in picked]
    return _greedy_independent(cols, order, m)


def _greedy_independent(cols: list[SparseCol], order: list[int], m: int) -> list[int] | None:
    """First m columns from `order` that are exactly linearly independent."""
    chosen: list[int] = []
    reduced: list[list[Fraction]] = []
    pivot_rows: list[int] = []
    rejects = 0
    for j in order:
        if rejects > 8 * m + 32:
            return None
        vec = [_ZERO] * m
        for r, v in cols[j]:
            vec[r] = v
        for row, base in zip(pivot_rows, reduced):
            if vec[row] != 0:
                f = vec[row]
                vec = [a - f * c for a, c in zip(vec, base)]
        lead = next((r for r in range(m) if vec[r] != 0), None)
        if lead is None:
            rejects += 1
            continue
        inv = 1 / vec[lead]
        reduced.append([v * inv for v in vec])
        pivot_rows.append(lead)
        chosen.append(j)
        if len(chosen) == m:
            return chosen
    return None

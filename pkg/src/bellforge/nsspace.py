"""No-signalling constraint space: canonical basis, decomposition, equivalence.

Adding any combination of these basis elements (or per-setting translations)
to a functional leaves its value unchanged on every no-signalling behaviour,
so two functionals related that way, up to positive scale, bound the same
experiments.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

import numpy as np

from ._exact import solve_square
from .core import BellFunctional, RationalTensor, Scenario
from .errors import DegenerateScale, InternalError, ScenarioMismatch


@dataclass(frozen=True)
class NsBasis:
    """Ordered basis of the no-signalling constraint space.

    Alice-type elements come first: for each output a0 <= kA-2, input x0 and
    adjacent pair (y0, y0+1), the element is +1 on p(a0, b | x0, y0) for all b
    and -1 on p(a0, b | x0, y0+1).  Bob-type elements follow symmetrically.
    """

    scenario: Scenario
    descriptors: tuple[tuple, ...]

    @property
    def size(self) -> int:
        return len(self.descriptors)

    def element(self, i: int) -> RationalTensor:
        tensor = np.zeros(self.scenario.shape, dtype=np.int8)
        for x, y, a, b, sign in self.entries(i):
            tensor[x, y, a, b] = sign
        return RationalTensor(tensor, 1)

    def entries(self, i: int) -> Iterator[tuple[int, int, int, int, int]]:
        """Sparse nonzero entries (x, y, a, b, sign) of element i."""
        kind, out, own, other = self.descriptors[i]
        if kind == "alice":
            a0, x0, y0 = out, own, other
            for b in range(self.scenario.kB):
                yield (x0, y0, a0, b, +1)
                yield (x0, y0 + 1, a0, b, -1)
        else:
            b0, y0, x0 = out, own, other
            for a in range(self.scenario.kA):
                yield (x0, y0, a, b0, +1)
                yield (x0 + 1, y0, a, b0, -1)

    def elements(self) -> list[RationalTensor]:
        return [self.element(i) for i in range(self.size)]


def build_basis(scenario: Scenario) -> NsBasis:
    """Canonical basis; its size is (kA-1)sA(sB-1) + (kB-1)sB(sA-1)."""
    descriptors = []
    for a0 in range(scenario.kA - 1):
        for x0 in range(scenario.sA):
            for y0 in range(scenario.sB - 1):
                descriptors.append(("alice", a0, x0, y0))
    for b0 in range(scenario.kB - 1):
        for y0 in range(scenario.sB):
            for x0 in range(scenario.sA - 1):
                descriptors.append(("bob", b0, y0, x0))
    return NsBasis(scenario, tuple(descriptors))


def translation_tensor(scenario: Scenario, x: int, y: int) -> RationalTensor:
    """Indicator of one setting: adds a constant there under translation."""
    tensor = np.zeros(scenario.shape, dtype=np.int8)
    tensor[x, y, :, :] = 1
    return RationalTensor(tensor, 1)


def _int_columns(scenario: Scenario, basis: NsBasis) -> np.ndarray:
    """All invariance directions, stacked as rows of an int64 matrix.

    Translation columns first (settings in row-major order), then the
    no-signalling basis, matching the coefficient order used below.
    """
    cols = [translation_tensor(scenario, x, y).num.ravel() for x, y in scenario.settings()]
    cols.extend(basis.element(i).num.ravel() for i in range(basis.size))
    return np.array(cols, dtype=np.int64)


@dataclass(frozen=True)
class Decomposition:
    """M = sum_i gamma_i S_i + sum_xy c_xy T_xy + residual, residual orthogonal."""

    gamma: tuple[Fraction, ...]
    translations: tuple[Fraction, ...]
    residual: BellFunctional


def decompose(functional: BellFunctional, basis: NsBasis | None = None) -> Decomposition:
    """Orthogonal split of a functional against translations and the basis."""
    scenario = functional.scenario
    if basis is None:
        basis = build_basis(scenario)
    elif basis.scenario != scenario:
        raise ScenarioMismatch("basis built for a different scenario")
    cols = _int_columns(scenario, basis)
    gram = cols @ cols.T
    m_num = [int(v) for v in functional.coefficients.num.flat]
    den = functional.coefficients.den
    rhs = [Fraction(sum(int(c) * v for c, v in zip(row, m_num)), den) for row in cols]
    solution = solve_square([[Fraction(int(v)) for v in row] for row in gram], rhs)
    if solution is None:
        raise InternalError("invariance directions are not independent")
    n_trans = scenario.sA * scenario.sB
    translations = tuple(solution[:n_trans])
    gamma = tuple(solution[n_trans:])
    combo = _combination(scenario, basis, gamma, translations)
    residual = BellFunctional(scenario, functional.coefficients - combo)
    return Decomposition(gamma, translations, residual)


def _combination(
    scenario: Scenario, basis: NsBasis, gamma, translations
) -> RationalTensor:
    total = RationalTensor.zeros(scenario.shape)
    for coeff, (x, y) in zip(translations, scenario.settings()):
        if coeff:
            total = total + translation_tensor(scenario, x, y).scale(coeff)
    for i, coeff in enumerate(gamma):
        if coeff:
            total = total + basis.element(i).scale(coeff)
    return total


@dataclass(frozen=True)
class EquivalenceWitness:
    """Certificate that M2 = scale*M1 + translations + no-signalling terms."""

    scale: Fraction
    translations: tuple[Fraction, ...]
    gamma: tuple[Fraction, ...]

    def verify(self, m1: BellFunctional, m2: BellFunctional, basis: NsBasis | None = None) -> bool:
        basis = basis or build_basis(m1.scenario)
        combo = _combination(m1.scenario, basis, self.gamma, self.translations)
        reconstructed = m1.coefficients.scale(self.scale) + combo
        return reconstructed == m2.coefficients


def check_equivalence(
    m1: BellFunctional, m2: BellFunctional, basis: NsBasis | None = None
) -> EquivalenceWitness | None:
    """Find positive scale and invariance terms mapping M1 to M2, if any.

    Returns None when the functionals are inequivalent.  Raises
    DegenerateScale when M1 itself is a combination of translations and
    no-signalling terms, leaving the scale undetermined.
    """
    if m1.scenario != m2.scenario:
        raise ScenarioMismatch("equivalence requires a common scenario")
    scenario = m1.scenario
    if basis is None:
        basis = build_basis(scenario)
    inv_cols = _int_columns(scenario, basis)
    m1_num = np.array([int(v) for v in m1.coefficients.num.flat], dtype=object)
    m2_num = [int(v) for v in m2.coefficients.num.flat]
    d1, d2 = m1.coefficients.den, m2.coefficients.den

    n_inv = inv_cols.shape[0]
    size = n_inv + 1
    gram = [[Fraction(0)] * size for _ in range(size)]
    gram_int = inv_cols @ inv_cols.T
    for i in range(n_inv):
        for j in range(n_inv):
            gram[i][j] = Fraction(int(gram_int[i][j]))
    cross = inv_cols.dot(m1_num)
    for i in range(n_inv):
        gram[i][n_inv] = gram[n_inv][i] = Fraction(int(cross[i]), d1)
    gram[n_inv][n_inv] = Fraction(int(m1_num.dot(m1_num)), d1 * d1)

    rhs = [Fraction(sum(int(c) * v for c, v in zip(row, m2_num)), d2) for row in inv_cols]
    rhs.append(Fraction(sum(int(a) * b for a, b in zip(m1_num, m2_num)), d1 * d2))

    solution = solve_square(gram, rhs)
    if solution is None:
        raise DegenerateScale(
            "first functional lies in the invariance span; scale undetermined"
        )
    n_trans = scenario.sA * scenario.sB
    witness = EquivalenceWitness(
        scale=solution[n_inv],
        translations=tuple(solution[:n_trans]),
        gamma=tuple(solution[n_trans:n_inv]),
    )
    if witness.scale <= 0:
        return None
    if not witness.verify(m1, m2, basis):
        return None
    return witness

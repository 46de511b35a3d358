"""Scenarios, exact tensors, Bell functionals, behaviours and their transforms.

Everything here is exact: coefficients are rationals stored as an integer
numerator array over a single common denominator, so equality tests,
evaluations and linear transforms never see floating point.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Literal, Mapping

import numpy as np

from .errors import InvalidTensor, ScenarioMismatch

Party = Literal["alice", "bob"]

_INT_DTYPES = (np.int8, np.int16, np.int32, np.int64)


def as_fraction(value) -> Fraction:
    """Coerce ints, strings like '3/4' or '0.25', and Fractions to Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"cannot convert {value!r} to a rational")
        return Fraction(value)
    raise TypeError(f"cannot interpret {type(value).__name__} as a rational")


def parse_rational(text: str, exact: bool = True, tol: float = 1e-12) -> Fraction:
    """Parse 'p/q' or a decimal string.

    With ``exact=False`` a decimal is replaced by the smallest-denominator
    rational within ``tol`` of it, which recovers simple fractions from
    rounded decimal input.
    """
    value = Fraction(text.strip())
    if exact:
        return value
    for exponent in range(0, 18):
        candidate = value.limit_denominator(10**exponent)
        if abs(candidate - value) <= tol:
            return candidate
    return value


def format_rational(value: Fraction) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class Scenario:
    """Bipartite scenario: input counts sA, sB and output counts kA, kB."""

    sA: int
    sB: int
    kA: int
    kB: int

    def __post_init__(self):
        for name in ("sA", "sB", "kA", "kB"):
            count = getattr(self, name)
            if not isinstance(count, int) or count < 1:
                raise InvalidTensor(f"{name} must be a positive integer, got {count!r}")

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return (self.sA, self.sB, self.kA, self.kB)

    @property
    def n_entries(self) -> int:
        return self.sA * self.sB * self.kA * self.kB

    def settings(self) -> Iterator[tuple[int, int]]:
        for x in range(self.sA):
            for y in range(self.sB):
                yield (x, y)

    def swapped(self) -> "Scenario":
        return Scenario(self.sB, self.sA, self.kB, self.kA)


def _reduce(num: np.ndarray, den: int) -> tuple[np.ndarray, int]:
    """Divide out the gcd of all numerators and the denominator."""
    if den <= 0:
        raise InvalidTensor("denominator must be positive")
    if num.dtype == object:
        g = den
        for v in num.flat:
            g = math.gcd(g, int(v))
            if g == 1:
                break
    else:
        g = math.gcd(int(np.gcd.reduce(num, axis=None)), den) if num.size else den
    if g > 1:
        num = num // g
        den //= g
    return num, den


class RationalTensor:
    """Exact rational array: integer numerators over one shared denominator.

    Numerators live in the narrowest practical integer dtype (or ``object``
    for arbitrary precision), which keeps large product tensors compact.
    The pair is always stored gcd-reduced, so two tensors are equal iff
    their reduced numerators and denominators match.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: np.ndarray, den: int = 1):
        num = np.asarray(num)
        if num.dtype not in _INT_DTYPES and num.dtype != object:
            if np.issubdtype(num.dtype, np.integer):
                num = num.astype(np.int64)
            else:
                raise InvalidTensor(f"numerators must be integers, got dtype {num.dtype}")
        num, den = _reduce(num, int(den))
        self.num = num
        self.den = den

    @classmethod
    def from_items(cls, items, shape: tuple[int, ...]) -> "RationalTensor":
        """Build from anything fraction-like, flattened in C order."""
        fracs = [as_fraction(v) for v in items]
        size = int(np.prod(shape)) if shape else 1
        if len(fracs) != size:
            raise InvalidTensor(f"expected {size} entries for shape {shape}, got {len(fracs)}")
        den = 1
        for f in fracs:
            den = den * f.denominator // math.gcd(den, f.denominator)
        num = np.array([f.numerator * (den // f.denominator) for f in fracs], dtype=object)
        return cls(_downcast(num.reshape(shape)), den)

    @classmethod
    def zeros(cls, shape: tuple[int, ...]) -> "RationalTensor":
        return cls(np.zeros(shape, dtype=np.int8), 1)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.num.shape

    def item(self, index) -> Fraction:
        return Fraction(int(self.num[index]), self.den)

    def iter_fractions(self) -> Iterator[Fraction]:
        for v in self.num.flat:
            yield Fraction(int(v), self.den)

    def tolist(self) -> list:
        return [Fraction(int(v), self.den) for v in self.num.flat]

    def to_float(self) -> np.ndarray:
        return self.num.astype(np.float64) / self.den

    def __eq__(self, other) -> bool:
        if not isinstance(other, RationalTensor):
            return NotImplemented
        return (
            self.den == other.den
            and self.shape == other.shape
            and bool(np.array_equal(self.num, other.num))
        )

    def __hash__(self):
        raise TypeError("RationalTensor is mutable-adjacent; hash not supported")

    def _binary(self, other: "RationalTensor", sign: int) -> "RationalTensor":
        if self.shape != other.shape:
            raise InvalidTensor(f"shape mismatch: {self.shape} vs {other.shape}")
        den = self.den * other.den // math.gcd(self.den, other.den)
        a = _widen(self.num) * (den // self.den)
        b = _widen(other.num) * (den // other.den)
        return RationalTensor(_downcast(a + sign * b), den)

    def __add__(self, other):
        return self._binary(other, +1)

    def __sub__(self, other):
        return self._binary(other, -1)

    def __neg__(self):
        return RationalTensor(-self.num, self.den)

    def scale(self, factor) -> "RationalTensor":
        factor = as_fraction(factor)
        num = _widen(self.num) * factor.numerator
        return RationalTensor(_downcast(num), self.den * factor.denominator)

    def is_zero(self) -> bool:
        return not np.any(self.num)

    def min(self) -> Fraction:
        return Fraction(int(self.num.min()), self.den)

    def max(self) -> Fraction:
        return Fraction(int(self.num.max()), self.den)

    def setting_extrema(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-setting (max, min) numerators for a (sA,sB,kA,kB) tensor."""
        flat = self.num.reshape(self.num.shape[0], self.num.shape[1], -1)
        return flat.max(axis=2), flat.min(axis=2)


def _widen(num: np.ndarray) -> np.ndarray:
    """Promote to object ints so products and sums cannot overflow."""
    if num.dtype == object:
        return num
    return num.astype(object)


def _downcast(num: np.ndarray) -> np.ndarray:
    """Store in the narrowest signed integer dtype that fits, else object."""
    if num.size == 0:
        return num.astype(np.int8)
    if num.dtype == object:
        lo, hi = min(num.flat), max(num.flat)
    else:
        lo, hi = int(num.min()), int(num.max())
    for dtype in _INT_DTYPES:
        info = np.iinfo(dtype)
        if info.min <= lo and hi <= info.max:
            return num.astype(dtype)
    return num if num.dtype == object else num.astype(object)


@dataclass(frozen=True)
class DeterministicStrategy:
    """One party's deterministic assignment: output for each input."""

    party: Party
    assignment: tuple[int, ...]

    def __post_init__(self):
        if self.party not in ("alice", "bob"):
            raise InvalidTensor(f"party must be 'alice' or 'bob', got {self.party!r}")
        if any(not isinstance(o, int) or o < 0 for o in self.assignment):
            raise InvalidTensor("assignments must be non-negative integers")


@dataclass(frozen=True)
class BellFunctional:
    """Coefficient tensor M[(x,y,a,b)] acting linearly on behaviours."""

    scenario: Scenario
    coefficients: RationalTensor

    def __post_init__(self):
        if self.coefficients.shape != self.scenario.shape:
            raise ScenarioMismatch(
                f"coefficient shape {self.coefficients.shape} does not match "
                f"scenario shape {self.scenario.shape}"
            )

    def swapped(self) -> "BellFunctional":
        """Exchange the two parties (transpose inputs and outputs)."""
        num = np.transpose(self.coefficients.num, (1, 0, 3, 2)).copy()
        return BellFunctional(
            self.scenario.swapped(), RationalTensor(num, self.coefficients.den)
        )


@dataclass(frozen=True)
class Behaviour:
    """Conditional distribution p(a,b|x,y), exact and normalised per setting."""

    scenario: Scenario
    probabilities: RationalTensor

    def __post_init__(self):
        probs = self.probabilities
        if probs.shape != self.scenario.shape:
            raise ScenarioMismatch(
                f"probability shape {probs.shape} does not match scenario "
                f"shape {self.scenario.shape}"
            )
        if probs.num.dtype != object and probs.num.min() < 0:
            raise InvalidTensor("probabilities must be non-negative")
        if probs.num.dtype == object and any(v < 0 for v in probs.num.flat):
            raise InvalidTensor("probabilities must be non-negative")
        sums = probs.num.reshape(self.scenario.sA, self.scenario.sB, -1).sum(axis=2)
        if not np.all(sums == probs.den):
            raise InvalidTensor("each setting must sum to exactly 1")


def evaluate(functional: BellFunctional, behaviour: Behaviour) -> Fraction:
    """Exact value sum_{xyab} M[xyab] * p(ab|xy)."""
    if functional.scenario != behaviour.scenario:
        raise ScenarioMismatch("functional and behaviour live on different scenarios")
    m, p = functional.coefficients, behaviour.probabilities
    if m.num.dtype != object and p.num.dtype != object:
        m_abs = max(abs(int(m.num.min())), abs(int(m.num.max())))
        p_abs = max(abs(int(p.num.min())), abs(int(p.num.max())))
        if m_abs * p_abs * m.num.size < 2**62:
            total = int(np.einsum("xyab,xyab->", m.num.astype(np.int64), p.num.astype(np.int64)))
            return Fraction(total, m.den * p.den)
    total = int((_widen(m.num) * _widen(p.num)).sum())
    return Fraction(total, m.den * p.den)


def behaviour_from_strategies(
    scenario: Scenario, alice: DeterministicStrategy, bob: DeterministicStrategy
) -> Behaviour:
    """Deterministic product behaviour p(ab|xy) = [a = g(x)][b = f(y)]."""
    if alice.party != "alice" or bob.party != "bob":
        raise InvalidTensor("pass the strategies as (alice, bob)")
    if len(alice.assignment) != scenario.sA or len(bob.assignment) != scenario.sB:
        raise ScenarioMismatch("strategy length does not match input count")
    if max(alice.assignment) >= scenario.kA or max(bob.assignment) >= scenario.kB:
        raise ScenarioMismatch("strategy output out of range")
    probs = np.zeros(scenario.shape, dtype=np.int8)
    for x, a in enumerate(alice.assignment):
        for y, b in enumerate(bob.assignment):
            probs[x, y, a, b] = 1
    return Behaviour(scenario, RationalTensor(probs, 1))


def translate(functional: BellFunctional, offsets) -> BellFunctional:
    """Add a per-setting constant: M'[xyab] = M[xyab] + c[x,y].

    On behaviours this shifts values by sum_xy c[x,y] because every setting
    is normalised.
    """
    scenario = functional.scenario
    if isinstance(offsets, RationalTensor):
        table = offsets
    else:
        if isinstance(offsets, Mapping):
            grid = [[offsets.get((x, y), 0) for y in range(scenario.sB)] for x in range(scenario.sA)]
        else:
            grid = offsets
        flat = [v for row in grid for v in row]
        table = RationalTensor.from_items(flat, (scenario.sA, scenario.sB))
    if table.shape != (scenario.sA, scenario.sB):
        raise ScenarioMismatch("offset table must have one entry per setting")
    ones = np.ones((scenario.kA, scenario.kB), dtype=np.int8)
    lifted = RationalTensor(
        _downcast(_widen(table.num)[:, :, None, None] * ones), table.den
    )
    return BellFunctional(scenario, functional.coefficients + lifted)


def scale(functional: BellFunctional, factor) -> BellFunctional:
    """Multiply every coefficient by a positive rational."""
    factor = as_fraction(factor)
    if factor <= 0:
        raise InvalidTensor("scale factor must be positive")
    return BellFunctional(functional.scenario, functional.coefficients.scale(factor))


def from_correlators(table) -> BellFunctional:
    """Two-output functional from a correlator table: M[xyab] = c[x,y]*(-1)^(a xor b)."""
    rows = [list(row) for row in table]
    sA = len(rows)
    sB = len(rows[0]) if sA else 0
    if sA == 0 or sB == 0 or any(len(row) != sB for row in rows):
        raise InvalidTensor("correlator table must be a non-empty rectangle")
    scenario = Scenario(sA, sB, 2, 2)
    flat = [v for row in rows for v in row]
    c = RationalTensor.from_items(flat, (sA, sB))
    signs = np.array([[1, -1], [-1, 1]], dtype=np.int8)
    num = _downcast(_widen(c.num)[:, :, None, None] * signs)
    return BellFunctional(scenario, RationalTensor(num, c.den))


# --- JSON wire format -------------------------------------------------------
#
# {"scenario": {"sA":2,"sB":2,"kA":2,"kB":2},
#  "coefficients": [{"x":0,"y":0,"a":0,"b":0,"v":"1/4"}, ...],
#  "meta": {...}}
#
# Zero entries are omitted; duplicate (x,y,a,b) keys are rejected.


def functional_to_json(functional: BellFunctional, meta: Mapping | None = None) -> dict:
    scenario = functional.scenario
    coeffs = functional.coefficients
    entries = []
    for (x, y, a, b), num in np.ndenumerate(coeffs.num):
        if num:
            entries.append(
                {"x": int(x), "y": int(y), "a": int(a), "b": int(b),
                 "v": format_rational(Fraction(int(num), coeffs.den))}
            )
    doc = {
        "scenario": {"sA": scenario.sA, "sB": scenario.sB, "kA": scenario.kA, "kB": scenario.kB},
        "coefficients": entries,
    }
    if meta:
        doc["meta"] = dict(meta)
    return doc


def functional_from_json(doc: Mapping) -> BellFunctional:
    try:
        s = doc["scenario"]
        scenario = Scenario(int(s["sA"]), int(s["sB"]), int(s["kA"]), int(s["kB"]))
    except (KeyError, TypeError) as exc:
        raise InvalidTensor(f"malformed scenario block: {exc}") from exc
    entries = doc.get("coefficients", [])
    seen: set[tuple[int, int, int, int]] = set()
    values: dict[tuple[int, int, int, int], Fraction] = {}
    for entry in entries:
        try:
            key = (int(entry["x"]), int(entry["y"]), int(entry["a"]), int(entry["b"]))
            value = as_fraction(entry["v"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidTensor(f"malformed coefficient entry {entry!r}") from exc
        x, y, a, b = key
        if not (0 <= x < scenario.sA and 0 <= y < scenario.sB
                and 0 <= a < scenario.kA and 0 <= b < scenario.kB):
            raise InvalidTensor(f"coefficient index {key} out of range")
        if key in seen:
            raise InvalidTensor(f"duplicate coefficient entry at {key}")
        seen.add(key)
        values[key] = value
    flat = [values.get((x, y, a, b), Fraction(0))
            for x in range(scenario.sA) for y in range(scenario.sB)
            for a in range(scenario.kA) for b in range(scenario.kB)]
    coeffs = RationalTensor.from_items(flat, scenario.shape)
    return BellFunctional(scenario, coeffs)


def dump_json(doc: Mapping) -> str:
    """Canonical serialisation: sorted keys, no whitespace variance."""
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def load_json(text: str) -> dict:
    return json.loads(text)

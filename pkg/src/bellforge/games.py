"""Nonlocal games: classification, the optimal affine normal form, lifting.

A functional is a game when it is entrywise non-negative and its per-setting
maxima sum to at most one; it then factors as a question distribution mu
times a predicate V with values in [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

import numpy as np

from .core import (
    BellFunctional,
    RationalTensor,
    Scenario,
    _downcast,
    _widen,
    as_fraction,
    format_rational,
    functional_from_json,
    functional_to_json,
)
from .errors import DegenerateFunctional, InvalidTensor, Unsupported


@dataclass(frozen=True)
class NonlocalGame:
    """Game tensor with its mu/predicate factorisation.

    mu may sum to less than one; the missing mass stands for rounds where no
    question is asked and the players lose by default.
    """

    tensor: BellFunctional
    mu: RationalTensor
    predicate: RationalTensor

    @property
    def scenario(self) -> Scenario:
        return self.tensor.scenario

    def validate(self) -> None:
        """Exact check of the factorisation invariant tensor = mu * V."""
        product = RationalTensor(
            _downcast(_widen(self.mu.num)[:, :, None, None] * _widen(self.predicate.num)),
            self.mu.den * self.predicate.den,
        )
        if product != self.tensor.coefficients:
            raise InvalidTensor("game tensor does not equal mu times predicate")
        if any(v < 0 for v in (self.mu.min(), self.predicate.min())):
            raise InvalidTensor("mu and predicate must be non-negative")
        if self.predicate.num.size and self.predicate.max() > 1:
            raise InvalidTensor("predicate values must lie in [0, 1]")
        if sum(self.mu.iter_fractions()) > 1:
            raise InvalidTensor("question distribution must sum to at most 1")


@dataclass(frozen=True)
class GameClassification:
    is_game: bool
    is_deterministic: bool
    is_unique: bool
    is_xor: bool
    reason: str = ""


def classify(functional: BellFunctional) -> GameClassification:
    """Decide game / deterministic-predicate / unique / XOR, exactly."""
    coeffs = functional.coefficients
    scenario = functional.scenario
    num = coeffs.num if coeffs.num.dtype == object else coeffs.num.astype(np.int64)
    if (num < 0).any():
        return GameClassification(False, False, False, False, "negative coefficient")
    maxes, _ = coeffs.setting_extrema()
    if Fraction(int(maxes.sum()), coeffs.den) > 1:
        return GameClassification(False, False, False, False, "setting maxima sum above 1")

    deterministic = bool(((num == 0) | (num == maxes[:, :, None, None])).all())

    unique = deterministic and scenario.kA == scenario.kB
    if unique:
        wins = (num == maxes[:, :, None, None]) & (maxes[:, :, None, None] > 0)
        row_ok = (wins.sum(axis=3) == 1) | ~wins.any(axis=(2, 3), keepdims=False)[:, :, None]
        col_ok = (wins.sum(axis=2) == 1) | ~wins.any(axis=(2, 3), keepdims=False)[:, :, None]
        unique = bool(row_ok.all() and col_ok.all())

    xor = unique and scenario.kA == 2 and scenario.kB == 2
    return GameClassification(True, deterministic, unique, xor)


def extract_mu_v(game_tensor: BellFunctional) -> tuple[RationalTensor, RationalTensor]:
    """Split a game tensor into mu (per-setting max) and predicate V = G/mu.

    Settings where the tensor vanishes get mu = 0 and V = 0: questions that
    are never asked.
    """
    info = classify(game_tensor)
    if not info.is_game:
        raise InvalidTensor(f"not a game tensor: {info.reason}")
    coeffs = game_tensor.coefficients
    maxes, _ = coeffs.setting_extrema()
    mu = RationalTensor(_downcast(np.asarray(maxes, dtype=object)), coeffs.den)
    num = _widen(coeffs.num)
    safe = np.where(maxes == 0, 1, maxes)
    if coeffs.num.dtype != object:
        safe = safe.astype(np.int64)
    # V = G / mu entrywise; entries are num / max within each setting.
    v_entries = [
        Fraction(int(n), int(m))
        for n, m in zip(num.flat, np.broadcast_to(safe[:, :, None, None], num.shape).flat)
    ]
    predicate = RationalTensor.from_items(v_entries, coeffs.num.shape)
    return mu, predicate


def game_from_tensor(game_tensor: BellFunctional) -> NonlocalGame:
    mu, predicate = extract_mu_v(game_tensor)
    return NonlocalGame(game_tensor, mu, predicate)


def to_game(functional: BellFunctional) -> tuple[NonlocalGame, Fraction, Fraction]:
    """Optimal affine normal form G = (M + alpha_xy) / g.

    alpha_xy is minus the per-setting minimum and g the total per-setting
    spread, so values of M and of G on behaviours are related by
    K -> (K + alpha) / g with alpha = sum_xy alpha_xy.  Returns the game
    together with (alpha, g).
    """
    coeffs = functional.coefficients
    maxes, mins = coeffs.setting_extrema()
    spread_num = int(maxes.sum()) - int(mins.sum())
    if spread_num == 0:
        raise DegenerateFunctional("functional is constant on every setting")
    g = Fraction(spread_num, coeffs.den)
    alpha = Fraction(-int(mins.sum()), coeffs.den)
    shifted = _widen(coeffs.num) - _widen(np.asarray(mins, dtype=object))[:, :, None, None]
    tensor = RationalTensor(_downcast(shifted), spread_num)
    game_tensor = BellFunctional(functional.scenario, tensor)

    mu = RationalTensor(_downcast(np.asarray(maxes - mins, dtype=object)), spread_num)
    safe = np.where(maxes == mins, 1, maxes - mins)
    v_entries = [
        Fraction(int(n), int(m))
        for n, m in zip(shifted.flat, np.broadcast_to(safe[:, :, None, None], shifted.shape).flat)
    ]
    predicate = RationalTensor.from_items(v_entries, coeffs.num.shape)
    return NonlocalGame(game_tensor, mu, predicate), alpha, g


def bound_map(alpha: Fraction, g: Fraction, value):
    """Map a bound K of the original functional to (K + alpha) / g for the game."""
    if isinstance(value, (int, Fraction)):
        return (as_fraction(value) + alpha) / g
    return (float(value) + float(alpha)) / float(g)


def lift_to_deterministic(functional: BellFunctional) -> tuple[NonlocalGame, Fraction, Fraction]:
    """Turn any two-output functional into a deterministic game.

    Inputs are doubled: on original setting pairs the tensor is shifted so
    at most two values appear, and each new setting cancels that shift with
    a sign flip, which is a no-signalling modification.  The result is
    passed through to_game, so the returned (alpha, g) give the bound map
    from the original functional to the lifted game.
    """
    scenario = functional.scenario
    if scenario.kA != 2 or scenario.kB != 2:
        raise Unsupported("lifting requires exactly two outputs per party")
    num = _widen(functional.coefficients.num)
    den = functional.coefficients.den
    sA, sB = scenario.sA, scenario.sB
    lifted = np.zeros((2 * sA, 2 * sB, 2, 2), dtype=object)
    for x in range(sA):
        for y in range(sB):
            a_shift = -num[x, y, 0, 1] + num[x, y, 1, 1]
            b_shift = -num[x, y, 1, 0] + num[x, y, 1, 1]
            for a in range(2):
                for b in range(2):
                    lifted[x, y, a, b] = (
                        num[x, y, a, b]
                        + (a_shift if a == 0 else 0)
                        + (b_shift if b == 0 else 0)
                    )
            lifted[x, y + sB, 0, 0] = lifted[x, y + sB, 0, 1] = -a_shift
            lifted[x + sA, y, 0, 0] = lifted[x + sA, y, 1, 0] = -b_shift
    big = BellFunctional(
        Scenario(2 * sA, 2 * sB, 2, 2), RationalTensor(_downcast(lifted), den)
    )
    return to_game(big)


def game_to_json(game: NonlocalGame, meta: Mapping | None = None) -> dict:
    doc = functional_to_json(game.tensor, meta)
    doc["mu"] = [
        {"x": x, "y": y, "v": format_rational(game.mu.item((x, y)))}
        for x, y in game.scenario.settings()
        if game.mu.num[x, y]
    ]
    doc["predicate"] = [
        {"x": int(x), "y": int(y), "a": int(a), "b": int(b),
         "v": format_rational(Fraction(int(v), game.predicate.den))}
        for (x, y, a, b), v in np.ndenumerate(game.predicate.num)
        if v
    ]
    return doc


def game_from_json(doc: Mapping, strict: bool = False) -> NonlocalGame:
    tensor = functional_from_json(doc)
    if "mu" not in doc and "predicate" not in doc:
        return game_from_tensor(tensor)
    scenario = tensor.scenario
    mu_entries = {}
    for entry in doc.get("mu", []):
        key = (int(entry["x"]), int(entry["y"]))
        if key in mu_entries:
            raise InvalidTensor(f"duplicate mu entry at {key}")
        mu_entries[key] = as_fraction(entry["v"])
    mu = RationalTensor.from_items(
        [mu_entries.get((x, y), Fraction(0)) for x, y in scenario.settings()],
        (scenario.sA, scenario.sB),
    )
    pred_entries = {}
    for entry in doc.get("predicate", []):
        key = (int(entry["x"]), int(entry["y"]), int(entry["a"]), int(entry["b"]))
        if key in pred_entries:
            raise InvalidTensor(f"duplicate predicate entry at {key}")
        pred_entries[key] = as_fraction(entry["v"])
    predicate = RationalTensor.from_items(
        [
            pred_entries.get((x, y, a, b), Fraction(0))
            for x in range(scenario.sA)
            for y in range(scenario.sB)
            for a in range(scenario.kA)
            for b in range(scenario.kB)
        ],
        scenario.shape,
    )
    game = NonlocalGame(tensor, mu, predicate)
    if strict:
        game.validate()
    return game

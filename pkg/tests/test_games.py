from __future__ import annotations

from fractions import Fraction as F

import numpy as np
import pytest

from bellforge import (
    BellFunctional,
    DegenerateFunctional,
    InvalidTensor,
    RationalTensor,
    Scenario,
    Unsupported,
    bound_map,
    chsh,
    cglmp,
    classify,
    extract_mu_v,
    from_correlators,
    game_from_json,
    game_from_tensor,
    game_to_json,
    i3322_game,
    lift_to_deterministic,
    local_bound_naive,
    magic_square,
    to_game,
)


def test_classify_catalog_games():
    c = classify(chsh().tensor)
    assert (c.is_game, c.is_deterministic, c.is_unique, c.is_xor) == (True, True, True, True)

    g = classify(cglmp(3).tensor)
    assert g.is_game and not g.is_deterministic and not g.is_unique and not g.is_xor

    i = classify(i3322_game().tensor)
    assert i.is_game and i.is_deterministic and not i.is_unique and not i.is_xor

    m = classify(magic_square().tensor)
    assert m.is_game and m.is_deterministic and not m.is_unique and not m.is_xor


def test_classify_rejects_non_games():
    neg = from_correlators([[1, 1], [1, -1]])
    c = classify(neg)
    assert not c.is_game and "negative" in c.reason

    big = BellFunctional(
        Scenario(1, 1, 2, 2), RationalTensor(np.array([[[[2, 0], [0, 0]]]]), 1)
    )
    c = classify(big)
    assert not c.is_game and "sum above 1" in c.reason


def test_extract_mu_v_roundtrip():
    game = chsh()
    mu, v = extract_mu_v(game.tensor)
    assert mu == game.mu and v == game.predicate
    assert all(f == F(1, 4) for f in mu.iter_fractions())
    assert set(v.iter_fractions()) == {F(0), F(1)}


def test_extract_mu_v_skips_silent_settings():
    num = np.zeros((2, 1, 2, 2), dtype=np.int64)
    num[0, 0] = [[1, 0], [0, 1]]
    f = BellFunctional(Scenario(2, 1, 2, 2), RationalTensor(num, 1))
    mu, v = extract_mu_v(f)
    assert mu.item((1, 0)) == 0
    assert all(v.item((1, 0, a, b)) == 0 for a in range(2) for b in range(2))


def test_game_validate_catches_bad_factorisation():
    game = chsh()
    broken = type(game)(game.tensor, game.mu, game.mu)  # predicate replaced
    with pytest.raises(InvalidTensor):
        broken.validate()
    game.validate()  # the real thing is consistent


def test_to_game_normalises_correlator_chsh():
    game, alpha, g = to_game(from_correlators([[1, 1], [1, -1]]))
    assert (alpha, g) == (F(4), F(8))
    assert game.tensor == chsh().tensor and game.mu == chsh().mu
    # bound map sends the functional's local bound to the game's
    assert bound_map(alpha, g, F(2)) == F(3, 4)
    assert np.isclose(bound_map(alpha, g, 2 * np.sqrt(2)), (2 + np.sqrt(2)) / 4)


def test_to_game_rejects_constant_functional():
    flat = BellFunctional(
        Scenario(1, 1, 2, 2), RationalTensor(np.full((1, 1, 2, 2), 3), 1)
    )
    with pytest.raises(DegenerateFunctional):
        to_game(flat)


def test_bound_map_preserves_types():
    assert isinstance(bound_map(F(1), F(2), F(1, 3)), F)
    assert isinstance(bound_map(F(1), F(2), 0.5), float)


def test_lift_doubles_inputs_and_stays_affine():
    f = from_correlators([[1, 1], [1, -1]])
    game, alpha, g = lift_to_deterministic(f)
    assert game.scenario == Scenario(4, 4, 2, 2)
    info = classify(game.tensor)
    assert info.is_game and info.is_deterministic
    before = local_bound_naive(f).value
    after = local_bound_naive(game.tensor).value
    assert after == (before + alpha) / g


def test_lift_requires_two_outputs():
    with pytest.raises(Unsupported):
        lift_to_deterministic(cglmp(3).tensor)


def test_game_json_roundtrip():
    game = magic_square()
    doc = game_to_json(game, meta={"note": "parity grid"})
    back = game_from_json(doc)
    assert back.tensor == game.tensor
    assert back.mu == game.mu and back.predicate == game.predicate


def test_game_json_strict_checks_factorisation():
    doc = game_to_json(chsh())
    doc["mu"][0]["v"] = "1/2"  # corrupt one mu entry
    with pytest.raises(InvalidTensor):
        game_from_json(doc, strict=True)


def test_game_from_tensor_equals_catalog():
    rebuilt = game_from_tensor(chsh().tensor)
    assert rebuilt.mu == chsh().mu and rebuilt.predicate == chsh().predicate

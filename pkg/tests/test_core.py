from __future__ import annotations

from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bellforge import (
    Behaviour,
    BellFunctional,
    DeterministicStrategy,
    InvalidTensor,
    RationalTensor,
    Scenario,
    ScenarioMismatch,
    as_fraction,
    behaviour_from_strategies,
    dump_json,
    evaluate,
    format_rational,
    from_correlators,
    functional_from_json,
    functional_to_json,
    load_json,
    parse_rational,
    scale,
    translate,
)


def test_as_fraction_exact_float():
    assert as_fraction(0.5) == F(1, 2)
    assert as_fraction(F(2, 3)) == F(2, 3)
    assert as_fraction(7) == F(7)
    # floats convert exactly, not through repr
    assert as_fraction(0.1) == F(0.1)


def test_parse_rational_exact_and_decimal():
    assert parse_rational("3/4") == F(3, 4)
    assert parse_rational("-7/2") == F(-7, 2)
    assert parse_rational("2") == F(2)
    assert parse_rational("0.25", exact=False) == F(1, 4)
    # shortest rational within tolerance, not the binary expansion
    assert parse_rational("0.3333333333333333", exact=False) == F(1, 3)


def test_parse_rational_rejects_junk():
    with pytest.raises(ValueError):
        parse_rational("3/4/5")
    with pytest.raises(ValueError):
        parse_rational("abc")


@given(st.fractions(max_denominator=10**6))
def test_format_parse_roundtrip(q):
    assert parse_rational(format_rational(q)) == q


def test_scenario_shape_and_settings():
    s = Scenario(2, 3, 4, 5)
    assert s.shape == (2, 3, 4, 5)
    assert s.n_entries == 2 * 3 * 4 * 5
    assert list(s.settings()) == [(x, y) for x in range(2) for y in range(3)]
    assert s.swapped() == Scenario(3, 2, 5, 4)


def test_scenario_rejects_empty():
    with pytest.raises(InvalidTensor):
        Scenario(0, 1, 2, 2)
    with pytest.raises(InvalidTensor):
        Scenario(2, 2, 2, -1)


def test_rational_tensor_reduces_gcd():
    t = RationalTensor(np.array([[[[2, 4], [6, 8]]]]), 10)
    assert t.den == 5
    assert t.item((0, 0, 0, 0)) == F(1, 5)
    assert t.item((0, 0, 1, 1)) == F(4, 5)


def test_rational_tensor_arithmetic():
    a = RationalTensor.from_items([F(1, 2), 0, 0, 0], (1, 1, 2, 2))
    b = RationalTensor.from_items([0, 0, 0, F(1, 3)], (1, 1, 2, 2))
    s = a + b
    assert s.item((0, 0, 0, 0)) == F(1, 2)
    assert s.item((0, 0, 1, 1)) == F(1, 3)
    assert (a - a).max() == 0
    assert a.scale(F(2, 3)).item((0, 0, 0, 0)) == F(1, 3)


def test_rational_tensor_extrema():
    t = RationalTensor(np.array([[[[1, -3], [0, 5]]], [[[2, 2], [2, 2]]]]), 4)
    highs, lows = t.setting_extrema()
    assert lows[0, 0] == -3 and highs[0, 0] == 5
    assert lows[1, 0] == 2 and highs[1, 0] == 2
    assert t.min() == F(-3, 4) and t.max() == F(5, 4)


def test_rational_tensor_to_float():
    t = RationalTensor(np.array([[[[1, 3]]]]), 4)
    assert np.allclose(t.to_float(), [[[[0.25, 0.75]]]])


def test_functional_scenario_mismatch():
    t = RationalTensor.zeros((2, 2, 2, 2))
    with pytest.raises(ScenarioMismatch):
        BellFunctional(Scenario(2, 2, 3, 3), t)


def test_evaluate_against_strategies():
    f = from_correlators([[1, 1], [1, -1]])
    alice = DeterministicStrategy("alice", (0, 0))
    bob = DeterministicStrategy("bob", (0, 0))
    p = behaviour_from_strategies(f.scenario, alice, bob)
    # all-zeros strategies give E_xy = 1 on every setting: 1+1+1-1 = 2
    assert evaluate(f, p) == F(2)


def test_behaviour_validates_normalisation():
    num = np.zeros((1, 1, 2, 2), dtype=np.int64)
    num[0, 0, 0, 0] = 1
    Behaviour(Scenario(1, 1, 2, 2), RationalTensor(num, 1))
    bad = np.zeros((1, 1, 2, 2), dtype=np.int64)
    with pytest.raises(InvalidTensor):
        Behaviour(Scenario(1, 1, 2, 2), RationalTensor(bad, 1))


def test_translate_shifts_value_per_setting():
    f = from_correlators([[1, 1], [1, -1]])
    alice = DeterministicStrategy("alice", (0, 1))
    bob = DeterministicStrategy("bob", (1, 0))
    p = behaviour_from_strategies(f.scenario, alice, bob)
    base = evaluate(f, p)
    shifted = translate(f, {(0, 1): F(5, 7)})
    assert evaluate(shifted, p) == base + F(5, 7)


def test_scale_multiplies_values():
    f = from_correlators([[1, 1], [1, -1]])
    g = scale(f, F(3, 2))
    assert g.coefficients.item((0, 0, 0, 0)) == f.coefficients.item((0, 0, 0, 0)) * F(3, 2)


def test_from_correlators_chsh_entries():
    f = from_correlators([[1, 1], [1, -1]])
    assert f.scenario == Scenario(2, 2, 2, 2)
    assert f.coefficients.item((0, 0, 0, 0)) == F(1)
    assert f.coefficients.item((0, 0, 0, 1)) == F(-1)
    assert f.coefficients.item((1, 1, 0, 0)) == F(-1)
    assert f.coefficients.item((1, 1, 1, 0)) == F(1)


def test_swapped_transposes_parties():
    f = from_correlators([[1, 2], [3, -4]])
    g = f.swapped()
    assert g.scenario == f.scenario.swapped()
    assert g.coefficients.item((1, 0, 0, 1)) == f.coefficients.item((0, 1, 1, 0))
    assert g.swapped().coefficients == f.coefficients


def test_functional_json_roundtrip():
    f = from_correlators([[1, 1], [1, -1]])
    doc = functional_to_json(f, meta={"label": "correlator form"})
    back = functional_from_json(load_json(dump_json(doc)))
    assert back.scenario == f.scenario
    assert back.coefficients == f.coefficients


def test_json_rejects_wrong_shape():
    f = from_correlators([[1, 1], [1, -1]])
    doc = functional_to_json(f)
    doc["scenario"] = [2, 2, 3, 3]
    with pytest.raises(InvalidTensor):
        functional_from_json(doc)


def test_dump_json_deterministic():
    doc1 = {"b": 1, "a": [1, 2]}
    doc2 = {"a": [1, 2], "b": 1}
    assert dump_json(doc1) == dump_json(doc2)


@given(
    st.integers(min_value=1, max_value=3),
    st.integers(min_value=1, max_value=3),
    st.integers(min_value=2, max_value=3),
    st.integers(min_value=2, max_value=3),
    st.integers(min_value=0, max_value=2**31),
)
def test_tensor_json_roundtrip_random(sa, sb, ka, kb, seed):
    rng = np.random.default_rng(seed)
    num = rng.integers(-5, 6, size=(sa, sb, ka, kb))
    f = BellFunctional(Scenario(sa, sb, ka, kb), RationalTensor(num, int(rng.integers(1, 9))))
    back = functional_from_json(functional_to_json(f))
    assert back.coefficients == f.coefficients

from __future__ import annotations

from fractions import Fraction as F

import numpy as np
import pytest

from bellforge import (
    BellFunctional,
    BudgetExceeded,
    RationalTensor,
    Scenario,
    behaviour_from_strategies,
    chsh,
    evaluate,
    from_correlators,
    local_bound_exact,
    local_bound_naive,
    seesaw_lower_bound,
)
from bellforge.localbound import HAVE_COMPILED_KERNEL


def _random_functional(rng, max_settings=3, max_outputs=3):
    sa = int(rng.integers(1, max_settings + 1))
    sb = int(rng.integers(1, max_settings + 1))
    ka = int(rng.integers(1, max_outputs + 1))
    kb = int(rng.integers(1, max_outputs + 1))
    num = rng.integers(-6, 7, size=(sa, sb, ka, kb))
    den = int(rng.integers(1, 5))
    return BellFunctional(Scenario(sa, sb, ka, kb), RationalTensor(num, den))


def test_chsh_correlator_bound_is_two():
    result = local_bound_exact(from_correlators([[1, 1], [1, -1]]))
    assert result.value == F(2)
    assert result.exact


def test_chsh_game_bound_is_three_quarters():
    result = local_bound_exact(chsh().tensor)
    assert result.value == F(3, 4)


def _value_of(f, result):
    return evaluate(f, behaviour_from_strategies(f.scenario, result.alice, result.bob))


def test_witness_strategies_reproduce_value():
    f = from_correlators([[1, 1], [1, -1]])
    result = local_bound_exact(f)
    assert _value_of(f, result) == result.value


def test_exact_matches_naive_on_random_instances():
    rng = np.random.default_rng(23)
    for _ in range(30):
        f = _random_functional(rng)
        fast = local_bound_exact(f)
        slow = local_bound_naive(f)
        assert fast.value == slow.value
        assert _value_of(f, fast) == fast.value


def test_threads_agree():
    f = BellFunctional(
        Scenario(3, 3, 2, 2),
        RationalTensor(np.random.default_rng(5).integers(-9, 10, size=(3, 3, 2, 2)), 2),
    )
    one = local_bound_exact(f, threads=1)
    two = local_bound_exact(f, threads=2)
    assert one.value == two.value
    assert one.strategies_scanned == two.strategies_scanned


def test_force_party_selects_enumeration_side():
    f = BellFunctional(
        Scenario(2, 3, 2, 2),
        RationalTensor(np.random.default_rng(9).integers(-5, 6, size=(2, 3, 2, 2)), 1),
    )
    via_alice = local_bound_exact(f, force_party="alice")
    via_bob = local_bound_exact(f, force_party="bob")
    assert via_alice.value == via_bob.value
    assert via_alice.strategies_scanned == 2**2
    assert via_bob.strategies_scanned == 2**3


def test_budget_exceeded_carries_partial():
    f = chsh().tensor
    with pytest.raises(BudgetExceeded) as info:
        local_bound_exact(f, budget=3)
    partial = info.value.partial
    assert partial is not None
    assert not partial.exact
    assert partial.value <= F(3, 4)


def test_naive_budget():
    with pytest.raises(BudgetExceeded):
        local_bound_naive(chsh().tensor, budget=10)


def test_engine_field_and_kernel_available():
    assert HAVE_COMPILED_KERNEL
    result = local_bound_exact(chsh().tensor)
    assert result.engine == "compiled"
    assert local_bound_naive(chsh().tensor).engine == "naive"


def test_wide_numerators_fall_back_to_python_engine():
    scale = 1 << 64
    num = np.array([[[[scale, -scale], [-scale, scale]]]], dtype=object)
    f = BellFunctional(Scenario(1, 1, 2, 2), RationalTensor(num, 3))
    result = local_bound_exact(f)
    assert result.engine == "python"
    assert result.value == F(scale, 3)


def test_pure_kernel_matches_compiled():
    from bellforge import _scan, _scan_py

    rng = np.random.default_rng(13)
    num = np.ascontiguousarray(rng.integers(-7, 8, size=(2, 2, 3, 3)).astype(np.int64))
    total = 3**2
    assert _scan.scan_range(num, 0, total) == _scan_py.scan_range(num, 0, total)


def test_seesaw_deterministic_and_below_exact():
    f = chsh().tensor
    a = seesaw_lower_bound(f, restarts=16, seed=42)
    b = seesaw_lower_bound(f, restarts=16, seed=42)
    assert (a.value, a.alice, a.bob) == (b.value, b.alice, b.bob)
    assert a.engine == "seesaw"
    assert not a.exact
    assert a.value <= local_bound_exact(f).value


def test_seesaw_finds_chsh_optimum():
    result = seesaw_lower_bound(chsh().tensor, restarts=8, seed=0)
    assert result.value == F(3, 4)

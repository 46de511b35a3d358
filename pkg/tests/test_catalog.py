from __future__ import annotations

from fractions import Fraction as F

import numpy as np
import pytest

from bellforge import (
    BudgetExceeded,
    InvalidMargin,
    ParallelGameSpec,
    Scenario,
    cglmp,
    cglmp_deterministic,
    check_equivalence,
    chsh,
    i3322_game,
    local_bound_exact,
    magic_square,
    parallel_compose,
    poisson_binomial_tail,
)


def test_chsh_shape_and_bound():
    game = chsh()
    game.validate()
    assert game.scenario == Scenario(2, 2, 2, 2)
    assert all(v == F(1, 4) for v in game.mu.iter_fractions())
    assert set(game.predicate.iter_fractions()) == {F(0), F(1)}
    assert local_bound_exact(game.tensor).value == F(3, 4)


def test_cglmp_two_outputs_is_chsh():
    two = cglmp(2)
    base = chsh()
    assert two.tensor == base.tensor
    assert two.mu == base.mu and two.predicate == base.predicate


def test_cglmp_bounds_and_grading():
    for d in (2, 3, 4, 5):
        game = cglmp(d)
        game.validate()
        assert local_bound_exact(game.tensor).value == F(3, 4)
        grades = set(game.predicate.iter_fractions())
        assert max(grades) == F(1)
        if d > 2:
            assert any(0 < v < 1 for v in grades)


def test_cglmp_deterministic_bound_and_equivalence_scale():
    for d in (2, 3, 4):
        det = cglmp_deterministic(d)
        det.validate()
        assert set(det.predicate.iter_fractions()) <= {F(0), F(1)}
        assert local_bound_exact(det.tensor).value == F(3, 4)
        witness = check_equivalence(cglmp(d).tensor, det.tensor)
        assert witness is not None and witness.scale == F(d - 1, d)
        reverse = check_equivalence(det.tensor, cglmp(d).tensor)
        assert reverse is not None and reverse.scale == F(d, d - 1)


def test_cglmp_rejects_single_output():
    from bellforge import Unsupported

    with pytest.raises(Unsupported):
        cglmp(1)
    with pytest.raises(Unsupported):
        cglmp_deterministic(1)


def test_i3322_game_structure():
    game = i3322_game()
    game.validate()
    assert game.scenario == Scenario(3, 3, 2, 2)
    # one question pair is never asked; the rest carry the full weight
    assert game.mu.num[2, 2] == 0
    assert sum(game.mu.iter_fractions()) == 1
    assert local_bound_exact(game.tensor).value == F(4, 5)


def test_magic_square_structure_and_bound():
    game = magic_square()
    game.validate()
    assert game.scenario == Scenario(3, 3, 4, 4)
    assert all(v == F(1, 9) for v in game.mu.iter_fractions())
    assert local_bound_exact(game.tensor).value == F(8, 9)


def test_parallel_chsh_win_all():
    composed = parallel_compose(ParallelGameSpec(chsh(), 2, threshold=2))
    composed.validate()
    assert composed.scenario == Scenario(4, 4, 4, 4)
    assert all(v == F(1, 16) for v in composed.mu.iter_fractions())
    assert local_bound_exact(composed.tensor).value == F(5, 8)


def test_parallel_single_copy_is_base():
    composed = parallel_compose(ParallelGameSpec(chsh(), 1, threshold=1))
    assert composed.tensor == chsh().tensor
    assert composed.mu == chsh().mu and composed.predicate == chsh().predicate


def test_parallel_threshold_one_of_two_is_free():
    composed = parallel_compose(ParallelGameSpec(chsh(), 2, threshold=1))
    assert local_bound_exact(composed.tensor).value == F(1)


def test_parallel_predicate_counts_wins():
    base = chsh()
    composed = parallel_compose(ParallelGameSpec(base, 2, threshold=2))
    v = base.predicate.num
    rng = np.random.default_rng(3)
    for _ in range(20):
        x1, x2, y1, y2, a1, a2, b1, b2 = rng.integers(0, 2, size=8)
        expected = int(v[x1, y1, a1, b1]) & int(v[x2, y2, a2, b2])
        got = composed.predicate.num[2 * x1 + x2, 2 * y1 + y2, 2 * a1 + a2, 2 * b1 + b2]
        assert int(got) == expected


def test_graded_compose_matches_bernoulli_tail():
    base = cglmp(3)
    composed = parallel_compose(ParallelGameSpec(base, 2, threshold=2))
    composed.validate()
    rng = np.random.default_rng(8)
    flat = [list(base.predicate.iter_fractions())]
    probs = np.array(flat[0], dtype=object).reshape(base.predicate.num.shape)
    for _ in range(20):
        x1, x2, y1, y2 = rng.integers(0, 2, size=4)
        a1, a2, b1, b2 = rng.integers(0, 3, size=4)
        p1 = probs[x1, y1, a1, b1]
        p2 = probs[x2, y2, a2, b2]
        expected = poisson_binomial_tail([p1, p2], 2)
        got = F(
            int(composed.predicate.num[2 * x1 + x2, 2 * y1 + y2, 3 * a1 + a2, 3 * b1 + b2]),
            composed.predicate.den,
        )
        assert got == expected == p1 * p2


def test_graded_tail_monotone_in_threshold():
    base = cglmp(3)
    loose = parallel_compose(ParallelGameSpec(base, 2, threshold=1))
    tight = parallel_compose(ParallelGameSpec(base, 2, threshold=2))
    diff = loose.predicate + tight.predicate.scale(F(-1))
    assert all(v >= 0 for v in diff.iter_fractions())


def test_resolve_threshold_rules():
    base = chsh()
    assert ParallelGameSpec(base, 4, threshold=3).resolve_threshold() == 3
    # ceil(4 * (3/4 + 1/8)) = 4, with the bound computed exactly when omitted
    assert ParallelGameSpec(base, 4, delta=F(1, 8)).resolve_threshold() == 4
    assert ParallelGameSpec(base, 4, delta=F(1, 8), omega_l=F(3, 4)).resolve_threshold() == 4
    with pytest.raises(InvalidMargin):
        ParallelGameSpec(base, 4).resolve_threshold()
    with pytest.raises(InvalidMargin):
        ParallelGameSpec(base, 4, threshold=2, delta=F(1, 8)).resolve_threshold()
    with pytest.raises(InvalidMargin):
        ParallelGameSpec(base, 4, threshold=5).resolve_threshold()
    with pytest.raises(InvalidMargin):
        ParallelGameSpec(base, 0, threshold=1).resolve_threshold()


def test_compose_budget():
    with pytest.raises(BudgetExceeded):
        parallel_compose(ParallelGameSpec(chsh(), 2, threshold=2), budget=100)


def test_poisson_binomial_tail_values():
    assert poisson_binomial_tail([F(1, 2), F(1, 2)], 0) == 1
    assert poisson_binomial_tail([F(1, 2), F(1, 2)], 1) == F(3, 4)
    assert poisson_binomial_tail([F(1, 2), F(1, 2)], 2) == F(1, 4)
    assert poisson_binomial_tail([F(1, 3), F(3, 4)], 2) == F(1, 4)
    assert poisson_binomial_tail([1, 1, 1], 3) == 1
    with pytest.raises(InvalidMargin):
        poisson_binomial_tail([F(3, 2)], 1)
    with pytest.raises(InvalidMargin):
        poisson_binomial_tail([F(1, 2)], 2)

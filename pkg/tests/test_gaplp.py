from __future__ import annotations

from fractions import Fraction as F

import numpy as np
import pytest

from bellforge import (
    BellFunctional,
    DegenerateFunctional,
    RationalTensor,
    Scenario,
    bounds_from_report,
    build_basis,
    check_equivalence,
    chsh,
    from_correlators,
    nonsignalling_bound,
    optimize_gap,
    translation_tensor,
    verify_certificate,
)


def test_chsh_correlator_form():
    report = optimize_gap(from_correlators([[1, 1], [1, -1]]))
    assert report.g == F(8) and report.alpha == F(4)
    assert all(c == 0 for c in report.gamma)
    assert report.game.tensor == chsh().tensor and report.game.mu == chsh().mu
    assert report.certificate.verified
    assert report.certificate.value == report.g
    assert report.ns_bound == F(1)


def test_bounds_from_report_types():
    report = optimize_gap(from_correlators([[1, 1], [1, -1]]))
    bounds = bounds_from_report(report, F(2), 2 * np.sqrt(2))
    assert bounds.omega_local == F(3, 4)
    assert isinstance(bounds.omega_quantum, float)
    assert np.isclose(bounds.omega_quantum, (2 + np.sqrt(2)) / 4)
    exact = bounds_from_report(report, F(2), F(3))
    assert exact.omega_quantum == F(7, 8) and exact.chi == F(1, 8)


def test_gamma_zero_preferred_when_input_is_optimal():
    game = chsh()
    report = optimize_gap(game.tensor)
    assert all(c == 0 for c in report.gamma)
    assert report.optimized_functional().coefficients == game.tensor.coefficients
    assert report.lex_passes == 0


def test_perturbed_input_recovers_same_game():
    f = from_correlators([[1, 1], [1, -1]])
    base = optimize_gap(f)
    basis = build_basis(f.scenario)
    coeffs = f.coefficients + basis.element(1).scale(F(3, 2))
    coeffs = coeffs + translation_tensor(f.scenario, 0, 1).scale(F(-2, 3))
    report = optimize_gap(BellFunctional(f.scenario, coeffs))
    assert report.g == base.g
    assert report.alpha == base.alpha + F(2, 3)
    assert report.game.tensor == base.game.tensor and report.game.mu == base.game.mu
    assert report.lex_passes > 0
    # the two inputs really are in one equivalence class
    assert check_equivalence(f, report.functional) is not None


def test_certificate_verifies_and_tampering_fails():
    f = from_correlators([[1, 1], [1, -1]])
    report = optimize_gap(f)
    basis = build_basis(f.scenario)
    cert = report.certificate
    assert verify_certificate(f, basis, cert.p, cert.q, report.g)
    assert not verify_certificate(f, basis, cert.p, cert.q, report.g + 1)
    assert not verify_certificate(f, basis, cert.q, cert.p, report.g)  # swapped roles


def test_certificate_digest_is_stable():
    f = from_correlators([[1, 1], [1, -1]])
    a = optimize_gap(f).certificate
    b = optimize_gap(f).certificate
    assert a.digest == b.digest and len(a.digest) == 64


def test_ns_bound_flag_and_standalone():
    f = from_correlators([[1, 1], [1, -1]])
    assert optimize_gap(f, compute_ns_bound=False).ns_bound is None
    assert nonsignalling_bound(f) == F(4)  # PR box reaches every correlator


def test_no_lexicographic_still_optimal():
    f = from_correlators([[1, 1], [1, -1]])
    basis = build_basis(f.scenario)
    g = BellFunctional(f.scenario, f.coefficients + basis.element(0).scale(F(5, 4)))
    report = optimize_gap(g, lexicographic=False)
    assert report.g == F(8)
    assert report.certificate.verified


def test_presolve_off_same_result():
    f = from_correlators([[1, 2], [2, -1]])
    a = optimize_gap(f, presolve=True)
    b = optimize_gap(f, presolve=False)
    assert a.g == b.g and a.alpha == b.alpha
    assert a.game.tensor == b.game.tensor


def test_constant_functional_rejected():
    flat = BellFunctional(
        Scenario(1, 1, 2, 2), RationalTensor(np.full((1, 1, 2, 2), 1), 1)
    )
    with pytest.raises(DegenerateFunctional):
        optimize_gap(flat)


def test_random_functionals_certificates_hold():
    rng = np.random.default_rng(11)
    for _ in range(12):
        sa, sb = int(rng.integers(1, 3)), int(rng.integers(1, 3))
        ka, kb = int(rng.integers(2, 4)), int(rng.integers(2, 4))
        num = rng.integers(-4, 5, size=(sa, sb, ka, kb))
        if not np.ptp(num.reshape(sa * sb, -1), axis=1).all():
            continue  # avoid constant settings
        f = BellFunctional(Scenario(sa, sb, ka, kb), RationalTensor(num, 3))
        report = optimize_gap(f)
        basis = build_basis(f.scenario)
        assert report.certificate.verified
        assert verify_certificate(f, basis, report.certificate.p, report.certificate.q, report.g)
        # optimal spread is never beaten by the trivial gamma = 0 spread
        maxes, mins = f.coefficients.setting_extrema()
        trivial = F(int(maxes.sum()) - int(mins.sum()), f.coefficients.den)
        assert report.g <= trivial

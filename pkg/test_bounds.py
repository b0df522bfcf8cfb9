#!/usr/bin/env python3
# ============================================================================
# test_bounds.py - Explicit systole constants, entropy ceiling, verification
# ============================================================================
#   step 1: radius recurrence (base case, small-E limit, coefficients)
#   step 2: non-positive constant vs a 50-digit reference, monotone in E, sqrt(A)
#   step 3: no-focal constant (locked derivation, limits, monotone in eps)
#   step 4: entropy ceiling B and verify_systole_bound verdicts
#
# RUN: cd ~/bolza-lab ; source venv/bin/activate ; python test_bounds.py
# ============================================================================

import math

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from models import BoundInputs, BoundTheorem, LabInputError, VerdictRow, VerificationFailure
from surface_atlas import SYSTOLE, build_bolza_atlas
from conformal_field import hyperbolic_field, normalize_area, single_bump_field, smoothing_corpus
from bounds_engine import (
    bound_for,
    curvature_mass,
    entropy_bound_report,
    log_area_polynomial,
    log_recurrence_coefficients,
    nofocal_bound_constant,
    recurrence_step,
    require_all_pass,
    systole_bound_constant,
    unrolled_log_R_hat,
    verify_systole_bound,
)
from bounds_engine.constants import theorem_log_R, theorem_log_R_hat

ATLAS = build_bolza_atlas()
CELLS = 40
FOUR_PI = 4 * math.pi


def _reference_ln_C(chi: int, E: float, A: float) -> float:
    """Printed closed form evaluated with 50 significant digits"""
    with mpmath.workdps(50):
        chi, E, A = mpmath.mpf(chi), mpmath.mpf(E), mpmath.mpf(A)
        pi = mpmath.pi
        R_hat = mpmath.expm1(2 * pi * E * (chi ** 2 - 3 * chi)) / (-pi * chi)
        R = pi * (chi ** 2 - chi) * R_hat ** 2 + (2 / pi) * (1 - pi * chi) * R_hat + 1 / pi
        return float((mpmath.log(A) - mpmath.log(R)) / 2)


def _reference_nofocal_ln_C(chi: int, E: float, A: float, eps: float) -> float:
    with mpmath.workdps(50):
        chi, E, A, eps = mpmath.mpf(chi), mpmath.mpf(E), mpmath.mpf(A), mpmath.mpf(eps)
        K = -2 * mpmath.pi * chi
        K1 = K + 2 * mpmath.pi - eps
        C3 = K + K1 + 2 * mpmath.pi - eps
        iso = 1 / (2 * eps)
        growth = mpmath.expm1(E * C3) / C3
        P1 = 1 + K1 * growth
        n = int(2 - chi) + 1
        R_hat = (2 / K1) * (P1 ** n - 1)
        R = (K1 / 2 + iso * K1 ** 2) * R_hat ** 2 + (4 * iso * K1 + 8 * iso) * R_hat + 4 * iso
        return float((mpmath.log(A) - mpmath.log(R)) / 2)


# ============================================================================
# RECURRENCE
# ============================================================================

def test_recurrence_base_case():
    print("=" * 60); print("TEST 1 - radius recurrence"); print("=" * 60)
    K = curvature_mass(-2)
    assert abs(K - FOUR_PI) < 1e-15
    ln_P, ln_Q = log_recurrence_coefficients(1.0, K)
    assert abs(math.exp(ln_P) - math.exp(FOUR_PI)) < 1e-9 * math.exp(FOUR_PI)
    assert abs(math.exp(ln_P) - 2.8675e5) < 1e2, math.exp(ln_P)
    Q = 2 * math.expm1(FOUR_PI) / FOUR_PI
    assert abs(recurrence_step(0.0, 2.0, 1.0, K) - 2 * Q) < 1e-12 * Q
    with pytest.raises(LabInputError):
        recurrence_step(-1.0, 1.0, 1.0, K)
    with pytest.raises(LabInputError):
        log_recurrence_coefficients(0.0, K)
    print(f"  PASS: P = {math.exp(ln_P):.5e}, r_1 = Q l")


def test_recurrence_small_E_limit():
    print("\n" + "=" * 60); print("TEST 2 - E -> 0 limit"); print("=" * 60)
    E = 1e-8
    ln_P, ln_Q = log_recurrence_coefficients(E, FOUR_PI)
    assert abs(math.exp(ln_P) - 1.0) < 1e-6
    assert abs(math.exp(ln_Q) / (2 * E) - 1.0) < 1e-6
    step = recurrence_step(1.0, 1.0, E, FOUR_PI)
    assert abs(step - (1.0 + 2 * E)) < 1e-6, step
    print("  PASS: P -> 1, Q -> 2E")


# ============================================================================
# NON-POSITIVE CONSTANT
# ============================================================================

def test_nonpositive_constant_value():
    print("\n" + "=" * 60); print("TEST 3 - genus 2 constant"); print("=" * 60)
    report = systole_bound_constant(BoundInputs())
    assert report.theorem == BoundTheorem.NONPOSITIVE and report.s == 4
    assert abs(report.ln_C - _reference_ln_C(-2, 1.0277, FOUR_PI)) < 1e-10, report.ln_C
    assert -63.2 < report.ln_C < -62.8, report.ln_C
    assert 0 < report.C < 1e-27, report.C
    assert len(report.steps) == 5
    print(f"  PASS: ln C = {report.ln_C:.6f}, C = {report.C:.4e}")


def test_unrolled_recurrence_matches_closed_form():
    print("\n" + "=" * 60); print("TEST 4 - two code paths for R_hat"); print("=" * 60)
    for E in (0.1, 0.5, 1.0277, 2.0):
        closed = theorem_log_R_hat(E, -2)
        unrolled = unrolled_log_R_hat(E, FOUR_PI, 5)
        assert abs(closed - unrolled) < 1e-11 * max(1.0, abs(closed)), (E, closed, unrolled)
    # s != 2 - chi goes through the explicit s-recurrence
    closed = systole_bound_constant(BoundInputs())
    shorter = systole_bound_constant(BoundInputs(s=2))
    assert abs(shorter.ln_R_hat - unrolled_log_R_hat(1.0277, FOUR_PI, 3)) < 1e-10
    assert shorter.ln_C > closed.ln_C
    print("  PASS: closed form and iteration agree")


def test_area_polynomial_matches_printed_form():
    for x in (0.0, 3.0, 62.7):
        assert abs(log_area_polynomial(FOUR_PI, 1 / FOUR_PI, x) - theorem_log_R(x, -2)) < 1e-12, x


def test_constant_monotone_in_E():
    print("\n" + "=" * 60); print("TEST 5 - C decreases as E grows"); print("=" * 60)
    values = [systole_bound_constant(BoundInputs(E=0.1 + 0.1 * i)).ln_C for i in range(20)]
    assert all(b < a for a, b in zip(values, values[1:])), values
    print(f"  PASS: ln C from {values[0]:.3f} to {values[-1]:.3f}")


def test_constant_scales_with_sqrt_area():
    base = systole_bound_constant(BoundInputs(A=1.0)).ln_C
    for A in (0.5, FOUR_PI, 100.0):
        assert abs(systole_bound_constant(BoundInputs(A=A)).ln_C - base - 0.5 * math.log(A)) < 1e-12


@settings(max_examples=100, deadline=None)
@given(chi=st.integers(-6, -1), E=st.floats(0.05, 3.0), A=st.floats(0.1, 100.0))
def test_log_domain_matches_reference(chi, E, A):
    report = systole_bound_constant(BoundInputs(chi=chi, E=E, A=A))
    reference = _reference_ln_C(chi, E, A)
    assert abs(report.ln_C - reference) < 1e-10 * max(1.0, abs(reference))


# ============================================================================
# NO-FOCAL CONSTANT
# ============================================================================

def test_nofocal_constant_locked():
    print("\n" + "=" * 60); print("TEST 6 - no-focal constant"); print("=" * 60)
    b = BoundInputs(eps=math.pi)
    report = nofocal_bound_constant(b)
    assert report.theorem == BoundTheorem.NOFOCAL
    assert abs(report.ln_C - _reference_nofocal_ln_C(-2, 1.0277, FOUR_PI, math.pi)) < 1e-10, report.ln_C
    assert -157.5 < report.ln_C < -155.5, report.ln_C
    assert report.C > 0
    assert abs(report.ln_K1 - math.log(5 * math.pi)) < 1e-12
    assert abs(report.ln_C3 - math.log(10 * math.pi)) < 1e-12
    assert bound_for(b, BoundTheorem.NOFOCAL).ln_C == report.ln_C
    # the no-focal chain is much weaker than the non-positive one
    assert report.ln_C < systole_bound_constant(b).ln_C
    print(f"  PASS: ln C = {report.ln_C:.6f}")


def test_nofocal_monotone_in_eps():
    values = [nofocal_bound_constant(BoundInputs(eps=eps)).ln_C for eps in (0.5, 1.0, 2.0, 4.0, 6.0)]
    assert all(b > a for a, b in zip(values, values[1:])), values


def test_nofocal_hypotheses():
    for kwargs in ({"eps": 0.0}, {"eps": 2 * math.pi}, {"eps": 1.0, "Cpos": 2 * math.pi - 1.0}):
        with pytest.raises(LabInputError):
            nofocal_bound_constant(BoundInputs(**kwargs))
    with pytest.raises(ValueError):
        BoundInputs(chi=0)
    with pytest.raises(ValueError):
        BoundInputs(eps=-1.0)


# ============================================================================
# ENTROPY CEILING AND VERIFICATION
# ============================================================================

def test_entropy_bound():
    print("\n" + "=" * 60); print("TEST 7 - entropy ceiling B = sabourau_C / C"); print("=" * 60)
    report = entropy_bound_report(BoundInputs(), 1.0)
    assert abs(report.ln_B + report.ln_C) < 1e-12
    assert 62.8 < report.ln_B < 63.2, report.ln_B
    other = entropy_bound_report(BoundInputs(), SYSTOLE)
    assert abs(other.ln_B + other.ln_C - math.log(SYSTOLE)) < 1e-12
    quadrupled = entropy_bound_report(BoundInputs(A=4 * FOUR_PI), 1.0)
    assert abs(report.ln_B - quadrupled.ln_B - math.log(2)) < 1e-12
    with pytest.raises(LabInputError):
        entropy_bound_report(BoundInputs(), 0.0)
    print(f"  PASS: ln B = {report.ln_B:.6f}")


def test_verify_systole_bound():
    print("\n" + "=" * 60); print("TEST 8 - verdict rows"); print("=" * 60)
    sigma = hyperbolic_field(ATLAS, CELLS)
    wrong_area = hyperbolic_field(ATLAS, CELLS, c=0.3)
    curved = normalize_area(single_bump_field(ATLAS, 1.0, cells=CELLS), FOUR_PI)
    rows = verify_systole_bound([sigma, wrong_area, curved], BoundInputs())
    assert len(rows) == 3
    assert rows[0].passed and rows[0].certified and abs(rows[0].systole - SYSTOLE) < 1e-3
    assert rows[0].margin > 3.0
    assert rows[1].excluded and rows[1].reason.startswith("area mismatch"), rows[1]
    assert rows[2].excluded and rows[2].reason.startswith("positive curvature mass"), rows[2]
    require_all_pass(rows)
    # the no-focal theorem admits a little positive curvature
    nofocal_rows = verify_systole_bound([sigma], BoundInputs(eps=math.pi), BoundTheorem.NOFOCAL)
    assert nofocal_rows[0].passed
    with pytest.raises(VerificationFailure):
        require_all_pass([VerdictRow(metric="bad", systole=1e-30, C=1e-28, margin=-1e-28, passed=False)])
    print(f"  PASS: sigma margin {rows[0].margin:.4f}, two exclusions")


def test_verdicts_over_smoothing_family():
    print("\n" + "=" * 60); print("TEST 9 - verdict rows along g_k"); print("=" * 60)
    corpus = smoothing_corpus(ATLAS, [2, 4, 8], cells=CELLS)
    for theorem, b in ((BoundTheorem.NONPOSITIVE, BoundInputs()),
                       (BoundTheorem.NOFOCAL, BoundInputs(eps=math.pi))):
        rows = verify_systole_bound(corpus, b, theorem)
        assert [row.metric for row in rows] == [g.label for g in corpus]
        for row in rows:
            assert row.passed or (row.excluded and row.reason), row
            if not row.excluded:
                assert math.isfinite(row.systole) and row.systole > row.C, row
        require_all_pass(rows)
    print(f"  PASS: {len(corpus)} smoothed metrics pass or are excluded with a reason")


def main():
    test_recurrence_base_case()
    test_recurrence_small_E_limit()
    test_nonpositive_constant_value()
    test_unrolled_recurrence_matches_closed_form()
    test_area_polynomial_matches_printed_form()
    test_constant_monotone_in_E()
    test_constant_scales_with_sqrt_area()
    test_log_domain_matches_reference()
    test_nofocal_constant_locked()
    test_nofocal_monotone_in_eps()
    test_nofocal_hypotheses()
    test_entropy_bound()
    test_verify_systole_bound()
    test_verdicts_over_smoothing_family()
    print("\nALL TESTS PASSED")


if __name__ == "__main__":
    main()

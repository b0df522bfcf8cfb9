#!/usr/bin/env python3
# ============================================================================
# test_entropy.py - Liouville sampling, metric and topological entropy
# ============================================================================
#   step 1: sampler contract (uniform sigma-area, e^{2u} weighting, seeds)
#   step 2: Riccati estimator on constant curvature, Jacobi cross-check
#   step 3: counting entropy, homothety scaling, ladder
#   step 4: ordering report and sys x h_top
#
# RUN: cd ~/bolza-lab ; source venv/bin/activate ; python test_entropy.py
# ============================================================================

import math

import numpy as np
import pytest
from scipy import stats

from models import EntropyEstimate, EntropyMethod, LabInputError
from surface_atlas import INRADIUS, SYSTOLE, build_bolza_atlas, disk_distance
from conformal_field import (
    hyperbolic_field,
    model_chart_field,
    normalize_area,
    random_bump_field,
    single_bump_field,
    smoothing_corpus,
)
from geodesic_engine import unit_state
from entropy_lab import (
    area_entropy,
    counting_length,
    entropy_from_count,
    entropy_order_report,
    li_inverse,
    liouville_arrays,
    liouville_sample,
    lyapunov_vs_jacobi_check,
    metric_entropy_estimate,
    order_from_estimates,
    sabourau_product,
    topological_entropy_counting,
    uniform_exponent,
)

ATLAS = build_bolza_atlas()
CELLS = 40


# ============================================================================
# SAMPLING
# ============================================================================

def test_sampling_is_deterministic():
    print("=" * 60); print("TEST 1 - fixed seed, identical samples"); print("=" * 60)
    m = random_bump_field(ATLAS, seed=1, cells=CELLS)
    z1, v1 = liouville_arrays(m, 500, seed=7)
    z2, v2 = liouville_arrays(m, 500, seed=7)
    assert np.array_equal(z1, z2) and np.array_equal(v1, v2)
    z3, _ = liouville_arrays(m, 500, seed=8)
    assert not np.array_equal(z1, z3)
    # every sample is a unit g-speed vector in the octagon
    speed = np.exp(m.log_factor(z1)) * np.abs(v1)
    assert np.allclose(speed, 1.0, atol=1e-12)
    assert ATLAS.contains(z1, tol=1e-12).all()
    states = liouville_sample(m, 3, seed=7)
    assert [s.position for s in states] == list(z1[:3])
    with pytest.raises(LabInputError):
        liouville_arrays(m, 0)
    print("  PASS")


def test_uniform_sigma_area():
    print("\n" + "=" * 60); print("TEST 2 - u = 0 samples are uniform in sigma-area"); print("=" * 60)
    z, _ = liouville_arrays(hyperbolic_field(ATLAS, CELLS), 10_000, seed=3)
    # eight congruent sectors
    sector = np.floor((np.angle(z) % (2 * math.pi)) / (math.pi / 4)).astype(int)
    counts = np.bincount(sector, minlength=8)
    assert stats.chisquare(counts).pvalue > 1e-3, counts
    # radial shells inside the inscribed disk: sigma-area 2 pi (cosh d - 1)
    edges = [0.0, 0.5, 1.0, INRADIUS]
    d = disk_distance(0j, z)
    observed = [int(((d >= a) & (d < b)).sum()) for a, b in zip(edges, edges[1:])]
    observed.append(z.size - sum(observed))
    fractions = [(math.cosh(b) - math.cosh(a)) / 2.0 for a, b in zip(edges, edges[1:])]
    fractions.append(1.0 - sum(fractions))
    assert stats.chisquare(observed, np.array(fractions) * z.size).pvalue > 1e-3, observed
    print(f"  PASS: sectors {counts.tolist()}")


def test_bump_weights_samples():
    print("\n" + "=" * 60); print("TEST 3 - bump of height ln 2 quadruples the density"); print("=" * 60)
    m = single_bump_field(ATLAS, math.log(2), cells=CELLS)
    z, _ = liouville_arrays(m, 20_000, seed=5)
    d = disk_distance(0j, z)
    inner_area = 2 * math.pi * (math.cosh(0.2) - 1)
    outer_area = ATLAS.area - 2 * math.pi * (math.cosh(0.8) - 1)
    inner = (d < 0.2).sum() / inner_area
    outer = (d > 0.8).sum() / outer_area
    ratio = inner / outer
    assert 3.0 <= ratio <= 4.4, ratio
    print(f"  PASS: density ratio {ratio:.3f}")


# ============================================================================
# METRIC ENTROPY
# ============================================================================

def test_constant_curvature_calibration():
    print("\n" + "=" * 60); print("TEST 4 - Riccati estimator at K = -1, -2, -4"); print("=" * 60)
    for K, tol in ((-1.0, 0.02), (-2.0, 0.03), (-4.0, 0.04)):
        m = hyperbolic_field(ATLAS, CELLS, c=-0.5 * math.log(-K))
        estimate = metric_entropy_estimate(m, 40, 20.0, seed=11)
        assert estimate.method == EntropyMethod.RICCATI
        assert abs(estimate.value - math.sqrt(-K)) < tol, (K, estimate.value)
        assert estimate.reseeds == 0 and estimate.discarded == 0
        assert abs(estimate.burn_in - 4.0) < 1e-12
    print("  PASS: sqrt(-K) recovered")


def test_riccati_matches_jacobi():
    print("\n" + "=" * 60); print("TEST 5 - Riccati average vs Jacobi growth"); print("=" * 60)
    for m in (hyperbolic_field(ATLAS, CELLS), random_bump_field(ATLAS, seed=6, cells=CELLS, amplitude=0.1)):
        riccati, jacobi = lyapunov_vs_jacobi_check(m, unit_state(m, 0.1 + 0.05j, 0.4), 50.0)
        assert abs(riccati - jacobi) < 1e-2 * max(jacobi, 1e-3), (m.label, riccati, jacobi)
    with pytest.raises(LabInputError):
        lyapunov_vs_jacobi_check(m, unit_state(m, 0j, 0.0), 0.0)
    print("  PASS")


def test_time_reversal():
    print("\n" + "=" * 60); print("TEST 6 - backward average equals forward average"); print("=" * 60)
    m = random_bump_field(ATLAS, seed=6, cells=CELLS, amplitude=0.1)
    forward = metric_entropy_estimate(m, 80, 20.0, seed=2)
    backward = metric_entropy_estimate(m, 80, 20.0, seed=2, reverse=True)
    margin = 4 * math.hypot(forward.stderr, backward.stderr) + 5e-3
    assert abs(forward.value - backward.value) < margin, (forward.value, backward.value, margin)
    assert backward.details["reverse"]
    print(f"  PASS: {forward.value:.4f} vs {backward.value:.4f}")


def test_standard_error_rate():
    print("\n" + "=" * 60); print("TEST 7 - four times the samples, half the error"); print("=" * 60)
    m = random_bump_field(ATLAS, seed=4, cells=CELLS, amplitude=0.2)
    small, large = [], []
    for seed in (1, 2, 3):
        small.append(metric_entropy_estimate(m, 400, 10.0, seed=seed, batches=40).stderr)
        large.append(metric_entropy_estimate(m, 1600, 10.0, seed=seed, batches=40).stderr)
    ratio = np.mean(small) / np.mean(large)
    assert 1.4 < ratio < 2.6, ratio
    with pytest.raises(LabInputError):
        metric_entropy_estimate(m, 10, 5.0, burn_in=5.0)
    print(f"  PASS: stderr ratio {ratio:.3f}")


def test_smoothing_family_entropy_decreases():
    print("\n" + "=" * 60); print("TEST 8 - h_metr along the smoothing family"); print("=" * 60)
    ks = [2, 4, 8]
    estimates = [metric_entropy_estimate(g, 200, 20.0, seed=9) for g in smoothing_corpus(ATLAS, ks, cells=CELLS)]
    for k, e in zip(ks, estimates):
        print(f"  k={k}: h_metr = {e.value:.5f} ± {e.stderr:.5f} ({e.reseeds} re-seeds)")
    for earlier, later in zip(estimates, estimates[1:]):
        assert later.value < earlier.value + 2 * math.hypot(earlier.stderr, later.stderr), (earlier, later)
    assert estimates[-1].value < estimates[0].value, [e.value for e in estimates]
    # strictly below the constant-curvature value at the same area
    last = estimates[-1]
    assert last.value < area_entropy(-2, 4 * math.pi) - 3 * last.stderr, last
    print("  PASS")


def test_smoothed_metric_entropy_halves_at_four_times_area():
    print("\n" + "=" * 60); print("TEST 9 - h_metr of g_4 at areas 4 pi and 16 pi"); print("=" * 60)
    g = smoothing_corpus(ATLAS, [4], cells=CELLS)[0]
    big = normalize_area(g, 16 * math.pi)
    small_area = metric_entropy_estimate(g, 60, 10.0, seed=4)
    four_times = metric_entropy_estimate(big, 60, 20.0, seed=4, dt=2 * 0.05)
    ratio = four_times.value / small_area.value
    assert abs(ratio - 0.5) < 0.05, (small_area.value, four_times.value)
    print(f"  PASS: {small_area.value:.5f} -> {four_times.value:.5f} (ratio {ratio:.4f})")


# ============================================================================
# TOPOLOGICAL ENTROPY
# ============================================================================

def test_li_inversion():
    print("\n" + "=" * 60); print("TEST 10 - logarithmic integral inversion"); print("=" * 60)
    x = li_inverse(100.0)
    assert 450 < x < 550, x
    assert abs(entropy_from_count(50, 2.0) - math.log(x) / 2.0) < 1e-12
    with pytest.raises(LabInputError):
        li_inverse(1.0)
    print(f"  PASS: li^-1(100) = {x:.3f}")


def test_counting_on_sigma():
    print("\n" + "=" * 60); print("TEST 11 - counting entropy of sigma"); print("=" * 60)
    m = hyperbolic_field(ATLAS, CELLS)
    assert uniform_exponent(m) == 0.0
    estimate = topological_entropy_counting(m, 8.0)
    assert estimate.method == EntropyMethod.COUNTING
    assert 0.85 <= estimate.value <= 1.15, estimate.value
    assert not estimate.truncated
    counts = [row["N"] for row in estimate.details["ladder"]]
    assert counts == sorted(counts) and counts[-1] == estimate.samples, counts
    assert abs(estimate.raw - math.log(estimate.samples) / 8.0) < 1e-12
    assert 0.0 < estimate.raw < estimate.value, (estimate.raw, estimate.value)
    with pytest.raises(LabInputError):
        topological_entropy_counting(model_chart_field(cells=40), 8.0)
    with pytest.raises(LabInputError):
        topological_entropy_counting(m, 1.0)
    print(f"  PASS: h_top ≈ {estimate.value:.4f} from {estimate.samples} classes")


def test_counting_scales_with_homothety():
    print("\n" + "=" * 60); print("TEST 12 - homothety scales h_top by e^-c"); print("=" * 60)
    c = 0.2
    base = topological_entropy_counting(hyperbolic_field(ATLAS, CELLS), 8.0).value
    m = hyperbolic_field(ATLAS, CELLS, c=c)
    assert abs(counting_length(m) - 8.0 * math.exp(c)) < 1e-9
    scaled = topological_entropy_counting(m, counting_length(m)).value
    assert abs(scaled - math.exp(-c) * base) < 1e-9, (scaled, base)
    print(f"  PASS: {base:.5f} -> {scaled:.5f}")


# ============================================================================
# REPORTS
# ============================================================================

def test_area_entropy():
    assert abs(area_entropy(-2, 4 * math.pi) - 1.0) < 1e-15
    assert abs(area_entropy(-2, 8 * math.pi) - 1 / math.sqrt(2)) < 1e-15
    with pytest.raises(LabInputError):
        area_entropy(0, 1.0)


def test_order_report_equality_mode():
    print("\n" + "=" * 60); print("TEST 13 - ordering at constant curvature"); print("=" * 60)
    report = entropy_order_report(hyperbolic_field(ATLAS, CELLS), n=40, T=20.0, seed=1)
    assert report.mode == "equality" and report.passed, report
    assert abs(report.middle - 1.0) < 1e-9
    print(f"  PASS: {report.h_metr:.4f} | {report.middle:.4f} | {report.h_top:.4f}")


def test_order_report_strict_mode():
    print("\n" + "=" * 60); print("TEST 14 - strict ordering verdicts"); print("=" * 60)
    m = random_bump_field(ATLAS, seed=3, cells=CELLS)
    middle = area_entropy(-2, m.area())
    top = EntropyEstimate(value=middle, stderr=0.01, samples=100, horizon=8.0, method=EntropyMethod.COUNTING)
    low = EntropyEstimate(value=0.5 * middle, stderr=0.01, samples=40, horizon=20.0, method=EntropyMethod.RICCATI)
    equal = EntropyEstimate(value=middle, stderr=0.01, samples=40, horizon=20.0, method=EntropyMethod.RICCATI)
    good = order_from_estimates(m, low, top)
    assert good.mode == "strict" and good.passed
    assert not order_from_estimates(m, equal, top).passed
    print("  PASS")


def test_sabourau_product():
    print("\n" + "=" * 60); print("TEST 15 - sys x h_top"); print("=" * 60)
    sigma = sabourau_product(hyperbolic_field(ATLAS, CELLS))
    assert abs(sigma - SYSTOLE) < 0.15 * SYSTOLE, sigma
    scaled = sabourau_product(hyperbolic_field(ATLAS, CELLS, c=0.3))
    assert abs(scaled - sigma) < 1e-3 * sigma, (scaled, sigma)
    print(f"  PASS: {sigma:.4f}, homothety {scaled:.4f}")


def main():
    test_sampling_is_deterministic()
    test_uniform_sigma_area()
    test_bump_weights_samples()
    test_constant_curvature_calibration()
    test_riccati_matches_jacobi()
    test_time_reversal()
    test_standard_error_rate()
    test_smoothing_family_entropy_decreases()
    test_smoothed_metric_entropy_halves_at_four_times_area()
    test_li_inversion()
    test_counting_on_sigma()
    test_counting_scales_with_homothety()
    test_area_entropy()
    test_order_report_equality_mode()
    test_order_report_strict_mode()
    test_sabourau_product()
    print("\nALL TESTS PASSED")


if __name__ == "__main__":
    main()

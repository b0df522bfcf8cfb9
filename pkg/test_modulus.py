#!/usr/bin/env python3
# ============================================================================
# test_modulus.py - Annulus moduli, modulus lower bounds, E(sigma)
# ============================================================================
#   step 1: flat cylinders and round annuli against closed forms
#   step 2: collars around the generator axes, conformal invariance
#   step 3: bound evaluators (non-positive and no-focal-points)
#   step 4: E(sigma) interval
#
# RUN: cd ~/bolza-lab ; source venv/bin/activate ; python test_modulus.py
# ============================================================================

import json
import math

import pytest
from hypothesis import given, settings, strategies as st

from models import LabInputError, ModulusMethod
from surface_atlas import SYSTOLE, GroupWord, build_bolza_atlas
from conformal_field import hyperbolic_field, random_bump_field
from conformal_modulus import (
    annulus_from_dict,
    collar_annulus,
    collar_modulus,
    estimate_E,
    flat_cylinder,
    maximal_collar_width,
    modulus_dirichlet,
    modulus_flat,
    modulus_lower_bound_nofocal,
    modulus_lower_bound_nonpositive,
    nofocal_modulus_constant,
    round_annulus,
    standard_collar_width,
)

ATLAS = build_bolza_atlas()
CELLS = 60
G0 = GroupWord.of((0,))


# ============================================================================
# FLAT REGIONS
# ============================================================================

def test_flat_cylinders():
    print("=" * 60); print("TEST 1 - flat cylinders"); print("=" * 60)
    for ratio in (0.5, 1.0, 2.0, 4.0):
        estimate = modulus_dirichlet(flat_cylinder(1.0, ratio))
        assert estimate.method == ModulusMethod.DIRICHLET
        assert abs(estimate.value - ratio) < 1e-2 * ratio, (ratio, estimate.value)
        assert modulus_flat(ratio, 1.0).value == ratio
    with pytest.raises(LabInputError):
        flat_cylinder(1.0, 0.0)
    with pytest.raises(LabInputError):
        flat_cylinder(1.0, 0.01)
    with pytest.raises(LabInputError):
        modulus_flat(0.0, 1.0)
    print("  PASS: Mod = d / l for d / l in 0.5, 1, 2, 4")


def test_round_annulus():
    print("\n" + "=" * 60); print("TEST 2 - round annulus"); print("=" * 60)
    exact = math.log(0.8 / 0.2) / (2 * math.pi)
    value = modulus_dirichlet(round_annulus(0.2, 0.8)).value
    assert abs(value - exact) < 1e-2 * exact, (value, exact)
    with pytest.raises(LabInputError):
        round_annulus(0.5, 0.5)
    print(f"  PASS: {value:.6f} vs ln(4) / 2 pi = {exact:.6f}")


def test_annulus_dict_roundtrip():
    print("\n" + "=" * 60); print("TEST 3 - annulus JSON"); print("=" * 60)
    region = flat_cylinder(1.0, 2.0, cells=32)
    again = annulus_from_dict(json.loads(json.dumps(region.to_dict())))
    assert again.kind == "cylinder" and again.periodic
    assert (again.level == region.level).all()
    collar = collar_annulus(G0, ATLAS, cells=40)
    with pytest.raises(LabInputError):
        annulus_from_dict(collar.to_dict())
    assert annulus_from_dict(collar.to_dict(), ATLAS).core == G0
    print("  PASS")


# ============================================================================
# COLLARS
# ============================================================================

def test_generator_collar():
    print("\n" + "=" * 60); print("TEST 4 - collar around the g0 axis"); print("=" * 60)
    limit = maximal_collar_width(ATLAS.generator(0), ATLAS)
    assert limit > standard_collar_width(SYSTOLE), limit
    collar = collar_annulus(G0, ATLAS, cells=80)
    width = collar.params["width"]
    exact = collar_modulus(width, SYSTOLE)
    value = modulus_dirichlet(collar, ATLAS).value
    assert abs(value - exact) < 3e-2 * exact, (value, exact)
    with pytest.raises(LabInputError):
        collar_annulus(G0, ATLAS, width=2 * limit, cells=40)
    with pytest.raises(LabInputError):
        collar_annulus(GroupWord.of((0, 4)), ATLAS, cells=40)
    print(f"  PASS: half-width {width:.4f}, Mod {value:.5f} vs {exact:.5f}")


def test_conformal_invariance():
    print("\n" + "=" * 60); print("TEST 5 - modulus depends on the conformal class only"); print("=" * 60)
    collar = collar_annulus(G0, ATLAS, cells=CELLS)
    reference = modulus_dirichlet(collar, ATLAS, hyperbolic_field(ATLAS, CELLS)).value
    values = [modulus_dirichlet(collar, ATLAS, random_bump_field(ATLAS, seed=s, cells=CELLS)).value
              for s in range(20)]
    spread = max(abs(v - reference) / reference for v in values)
    assert spread < 1e-2, spread
    with pytest.raises(LabInputError):
        modulus_dirichlet(flat_cylinder(1.0, 1.0), m=hyperbolic_field(ATLAS, CELLS))
    print(f"  PASS: 20 random fields within {100 * spread:.3f}%")


# ============================================================================
# BOUND EVALUATORS
# ============================================================================

def test_bound_values():
    print("\n" + "=" * 60); print("TEST 6 - modulus lower bounds"); print("=" * 60)
    assert modulus_lower_bound_nonpositive(0.0, 1.0, -2) == 0.0
    value = modulus_lower_bound_nonpositive(1.0, 1.0, -2)
    assert abs(value - math.log(1 + 4 * math.pi) / (4 * math.pi)) < 1e-12
    assert abs(value - 0.20752) < 1e-5, value
    same = modulus_lower_bound_nofocal(1.0, 1.0, -2, 0.0, 0.0)
    assert abs(same - value) < 1e-12
    curved = modulus_lower_bound_nofocal(1.0, 1.0, -2, math.pi, 0.0)
    assert abs(curved - 0.17926) < 1e-5, curved
    assert abs(nofocal_modulus_constant(-2, math.pi, 0.0) - 5 * math.pi) < 1e-12
    wider = modulus_lower_bound_nofocal(1.0, 1.0, -2, 0.0, 0.0, C3=8 * math.pi)
    assert abs(wider - math.log1p(8 * math.pi) / (8 * math.pi)) < 1e-12 and wider < value
    with pytest.raises(LabInputError):
        modulus_lower_bound_nofocal(1.0, 1.0, -2, 0.0, 0.0, C3=1.0)
    for bad in ((-1.0, 1.0, -2), (1.0, 0.0, -2), (1.0, 1.0, 0)):
        with pytest.raises(LabInputError):
            modulus_lower_bound_nonpositive(*bad)
    with pytest.raises(LabInputError):
        modulus_lower_bound_nofocal(1.0, 1.0, -2, -0.1, 0.0)
    print(f"  PASS: {value:.5f} and {curved:.5f}")


@settings(max_examples=200, deadline=None)
@given(d=st.floats(0.0, 50.0), l=st.floats(1e-3, 50.0), chi=st.integers(-10, -1))
def test_bound_below_flat_ratio(d, l, chi):
    assert modulus_lower_bound_nonpositive(d, l, chi) <= d / l + 1e-12


@settings(max_examples=100, deadline=None)
@given(d=st.floats(1e-3, 10.0), cpos=st.floats(0.0, 20.0), extra=st.floats(1e-3, 5.0))
def test_nofocal_bound_decreases_with_curvature(d, cpos, extra):
    lower = modulus_lower_bound_nofocal(d, 1.0, -2, cpos + extra, 0.0)
    upper = modulus_lower_bound_nofocal(d, 1.0, -2, cpos, 0.0)
    assert lower <= upper + 1e-15


# ============================================================================
# E(sigma)
# ============================================================================

def test_estimate_E():
    print("\n" + "=" * 60); print("TEST 7 - E(sigma) interval"); print("=" * 60)
    interval = estimate_E(ATLAS, cells=40)
    assert abs(interval.upper - math.pi / SYSTOLE) < 1e-12
    assert abs(interval.upper - 1.0277) < 1e-4, interval.upper
    assert 0 < interval.lower <= interval.upper, interval
    standard = collar_modulus(standard_collar_width(SYSTOLE), SYSTOLE)
    assert interval.lower >= standard, (interval.lower, standard)
    print(f"  PASS: E in [{interval.lower:.5f}, {interval.upper:.5f}]")


def main():
    test_flat_cylinders()
    test_round_annulus()
    test_annulus_dict_roundtrip()
    test_generator_collar()
    test_conformal_invariance()
    test_bound_values()
    test_bound_below_flat_ratio()
    test_nofocal_bound_decreases_with_curvature()
    test_estimate_E()
    print("\nALL TESTS PASSED")


if __name__ == "__main__":
    main()

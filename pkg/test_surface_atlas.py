#!/usr/bin/env python3
# ============================================================================
# test_surface_atlas.py - Octagon, deck group, words and closed sigma-geodesics
# ============================================================================
# Pure geometry (no grids):
#   step 1: octagon constants, angles, relation word
#   step 2: canonicalize (domain reduction) incl. range errors
#   step 3: word enumeration and class merging
#   step 4: orbit balls, neighbour tiles, classes up to a length
#
# RUN: cd ~/bolza-lab ; source venv/bin/activate ; python test_surface_atlas.py
# ============================================================================

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from models import LabInputError, LabRangeError
from surface_atlas import (
    CIRCUMRADIUS,
    INRADIUS,
    RELATION_WORD,
    SYSTOLE,
    VERTEX_RADIUS,
    FundamentalOctagon,
    GroupWord,
    build_bolza_atlas,
    canonical_form,
    canonicalize,
    chord_crossings,
    chord_walk,
    classes_up_to_length,
    cyclically_reduced_count,
    disk_distance,
    distinct_geodesic_classes,
    enumerate_classes,
    inverse_index,
    neighbor_tiles,
    orbit_ball,
    translation_length,
    word_to_isometry,
)

ATLAS = build_bolza_atlas()


def test_octagon_constants():
    print("=" * 60); print("TEST 1 - octagon constants"); print("=" * 60)
    assert abs(SYSTOLE - 2 * math.acosh(1 + math.sqrt(2))) < 1e-15, SYSTOLE
    assert abs(SYSTOLE - 3.05714) < 1e-5, SYSTOLE
    assert abs(VERTEX_RADIUS - 2 ** -0.25) < 1e-12, VERTEX_RADIUS
    assert abs(ATLAS.area - 4 * math.pi) < 1e-12, ATLAS.area
    angles = ATLAS.interior_angles()
    assert np.allclose(angles, math.pi / 4, atol=1e-9), angles
    # vertices lie at hyperbolic distance circumradius from 0
    assert np.allclose(disk_distance(0j, np.array(ATLAS.vertices)), CIRCUMRADIUS, atol=1e-12)
    assert abs(disk_distance(0j, ATLAS.side_midpoint(3)) - INRADIUS) < 1e-12
    print(f"  PASS: systole {SYSTOLE:.6f}, angles pi/4, area 4 pi")


def test_generators_pair_sides():
    print("\n" + "=" * 60); print("TEST 2 - side pairings"); print("=" * 60)
    for k in range(8):
        g = ATLAS.generator(k)
        assert abs(translation_length(g) - SYSTOLE) < 1e-12, (k, translation_length(g))
        assert g.inverse().close_to(ATLAS.generator(inverse_index(k))), k
        # g_k maps the midpoint of side k+4 to the midpoint of side k
        assert abs(g.apply(ATLAS.side_midpoint(k + 4)) - ATLAS.side_midpoint(k)) < 1e-12, k
    print("  PASS: eight generators of translation length sys, inverses paired")


def test_relation_word_is_identity():
    print("\n" + "=" * 60); print("TEST 3 - surface relation"); print("=" * 60)
    h = word_to_isometry(GroupWord.of(RELATION_WORD), ATLAS)
    assert h.is_identity(1e-9), h
    assert word_to_isometry(GroupWord.of(()), ATLAS).is_identity()
    print("  PASS: g0 g3 g6 g1 g4 g7 g2 g5 = 1")


def test_word_validation():
    print("\n" + "=" * 60); print("TEST 4 - invalid generator index"); print("=" * 60)
    with pytest.raises(LabInputError):
        word_to_isometry((0, 9), ATLAS)
    with pytest.raises(LabInputError):
        GroupWord.of((0, -1))
    print("  PASS: indices outside 0..7 rejected")


def test_canonicalize_known_point():
    print("\n" + "=" * 60); print("TEST 5 - canonicalize"); print("=" * 60)
    p = ATLAS.generator(2).apply(0.1 + 0.05j)
    point, h = canonicalize(p, ATLAS)
    assert point.in_domain
    assert abs(point.z - (0.1 + 0.05j)) < 1e-12, point.z
    assert abs(h.apply(p) - point.z) < 1e-12
    with pytest.raises(LabRangeError):
        canonicalize(1.0 + 0j, ATLAS)
    with pytest.raises(LabRangeError):
        ATLAS.canonicalize_batch(np.array([1.0 - 1e-12]))
    print(f"  PASS: {p:.4f} -> {point.z:.4f}")


@settings(max_examples=40, deadline=None)
@given(r=st.floats(0.0, 0.98), theta=st.floats(0.0, 2 * math.pi))
def test_canonicalize_lands_in_domain(r, theta):
    p = r * complex(math.cos(theta), math.sin(theta))
    point, h = canonicalize(p, ATLAS)
    assert ATLAS.contains(point.z, tol=1e-9)
    assert abs(h.apply(p) - point.z) < 1e-8
    # a deck map preserves distances between images
    q = 0.5 * p
    assert abs(disk_distance(h.apply(p), h.apply(q)) - disk_distance(p, q)) < 1e-6


def test_enumeration_counts():
    print("\n" + "=" * 60); print("TEST 6 - word enumeration"); print("=" * 60)
    assert cyclically_reduced_count(1) == 8
    assert cyclically_reduced_count(2) == 56
    one = enumerate_classes(ATLAS, 1)
    assert [w.letters for w in one] == [(0,), (1,), (2,), (3,)], one
    two = enumerate_classes(ATLAS, 2)
    assert all(canonical_form(w.letters) == w.letters for w in two)
    assert len({w.letters for w in two}) == len(two)
    with pytest.raises(LabInputError):
        enumerate_classes(ATLAS, 0)
    print(f"  PASS: {len(one)} classes of length 1, {len(two)} up to length 2")


def test_distinct_classes_merge_conjugates():
    print("\n" + "=" * 60); print("TEST 7 - surface classes"); print("=" * 60)
    words = [GroupWord.of((0,)), GroupWord.of((4,)), GroupWord.of((1,)), GroupWord.of((0, 0))]
    classes = distinct_geodesic_classes(words, ATLAS)
    # g4 = g0^-1 is the same unoriented geodesic; g0^2 is not primitive
    assert len(classes) == 2, [c.word.label() for c in classes]
    assert classes[0].aliases and classes[0].aliases[0].letters == (4,)
    walk = chord_walk(ATLAS.generator(0), ATLAS)
    assert abs(walk.length - SYSTOLE) < 1e-9, walk.length
    assert chord_crossings(walk) == 0
    print(f"  PASS: {len(classes)} classes, chord walk length {walk.length:.6f}")


def test_neighbor_tiles():
    print("\n" + "=" * 60); print("TEST 8 - neighbour tiles"); print("=" * 60)
    tiles = neighbor_tiles(ATLAS)
    assert len(tiles) == 49, len(tiles)
    assert tiles[0].is_identity()
    print("  PASS: identity + 48 neighbours")


def test_orbit_ball():
    print("\n" + "=" * 60); print("TEST 9 - orbit balls"); print("=" * 60)
    a, b = orbit_ball(ATLAS, 0.0)
    assert a.size == 1 and abs(b[0]) < 1e-15
    # the nearest orbit points are the eight side pairings, at distance 2 * inradius
    a, b = orbit_ball(ATLAS, SYSTOLE + 1e-6)
    assert a.size == 9, a.size
    a, b = orbit_ball(ATLAS, 5.0)
    assert np.all(2.0 * np.arccosh(np.maximum(1.0, np.abs(a))) <= 5.0 + 1e-9)
    assert a.size > 49
    with pytest.raises(LabInputError):
        orbit_ball(ATLAS, -1.0)
    print(f"  PASS: {a.size} elements within distance 5")


def test_twelve_systoles():
    print("\n" + "=" * 60); print("TEST 10 - systolic classes of the Bolza surface"); print("=" * 60)
    classes = classes_up_to_length(ATLAS, SYSTOLE + 1e-6)
    assert len(classes) == 12, len(classes)
    assert all(abs(c.length - SYSTOLE) < 1e-9 for c in classes)
    # nothing shorter than the systole
    assert classes_up_to_length(ATLAS, SYSTOLE - 1e-3) == []
    print("  PASS: 12 simple closed geodesics of length sys")


def test_atlas_json_roundtrip():
    print("\n" + "=" * 60); print("TEST 11 - atlas JSON"); print("=" * 60)
    text = ATLAS.to_json()
    assert json.loads(text)["schema"] == "bolza-atlas/1"
    again = FundamentalOctagon.from_json(text)
    assert all(g.close_to(h) for g, h in zip(again.generators, ATLAS.generators))
    bad = json.loads(text)
    bad["schema"] = "bolza-atlas/0"
    with pytest.raises(LabInputError):
        FundamentalOctagon.from_json(json.dumps(bad))
    print("  PASS: versioned atlas file")


def main():
    test_octagon_constants()
    test_generators_pair_sides()
    test_relation_word_is_identity()
    test_word_validation()
    test_canonicalize_known_point()
    test_canonicalize_lands_in_domain()
    test_enumeration_counts()
    test_distinct_classes_merge_conjugates()
    test_neighbor_tiles()
    test_orbit_ball()
    test_twelve_systoles()
    test_atlas_json_roundtrip()
    print("\nALL TESTS PASSED")


if __name__ == "__main__":
    main()

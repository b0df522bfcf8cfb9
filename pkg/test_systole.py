#!/usr/bin/env python3
# ============================================================================
# test_systole.py - Systole search, intersection numbers, length comparisons
# ============================================================================
#   step 1: systole of sigma and its homotheties (certified)
#   step 2: polyline intersection numbers vs the sigma chord oracle
#   step 3: thick/thin and collar length ratios
#
# RUN: cd ~/bolza-lab ; source venv/bin/activate ; python test_systole.py
# ============================================================================

import math
import tempfile
from pathlib import Path

import numpy as np
import pytest

from models import LabInputError, SystoleResult
from surface_atlas import (
    SYSTOLE,
    GroupWord,
    build_bolza_atlas,
    chord_crossings,
    classes_up_to_length,
)
from conformal_field import hyperbolic_field, model_chart_field, normalize_area, random_bump_field, smoothing_corpus
from geodesic_engine import (
    candidate_classes,
    collar_probe,
    intersection_number,
    is_simple_class,
    self_intersection_number,
    shorten_loop,
    sigma_intersection,
    systole,
    systole_search,
    thick_thin_probe,
)

ATLAS = build_bolza_atlas()
CELLS = 40
G0, G1 = GroupWord.of((0,)), GroupWord.of((1,))


# ============================================================================
# SYSTOLE
# ============================================================================

def test_sigma_systole():
    print("=" * 60); print("TEST 1 - systole of sigma"); print("=" * 60)
    result = systole(hyperbolic_field(ATLAS, CELLS), max_word_len=1)
    assert isinstance(result, SystoleResult)
    assert abs(result.length - SYSTOLE) < 1e-3, result.length
    assert len(result.word) == 1
    assert result.certified
    assert abs(result.ratio_min - 1.0) < 1e-5
    assert result.simple_length is not None and abs(result.simple_length - SYSTOLE) < 1e-3
    print(f"  PASS: sys = {result.length:.6f} by {result.word}, certified")


def test_longer_words_keep_the_generator():
    print("\n" + "=" * 60); print("TEST 2 - word length 2"); print("=" * 60)
    classes = candidate_classes(ATLAS, 2)
    assert len(classes) > 4
    result = systole(hyperbolic_field(ATLAS, CELLS), max_word_len=2)
    assert abs(result.length - SYSTOLE) < 1e-3, result.length
    assert result.candidates == len(classes)
    with pytest.raises(LabInputError):
        candidate_classes(ATLAS, 0)
    print(f"  PASS: {len(classes)} candidate classes")


def test_homothety_systole():
    print("\n" + "=" * 60); print("TEST 3 - area 8 pi"); print("=" * 60)
    m = hyperbolic_field(ATLAS, CELLS, c=0.5 * math.log(2))
    result, geodesics = systole_search(m, 1)
    assert abs(result.length - math.sqrt(2) * SYSTOLE) < 1e-3, result.length
    assert len(geodesics) == result.candidates
    with pytest.raises(LabInputError):
        systole(model_chart_field(cells=40), 1)
    print(f"  PASS: sys = {result.length:.6f}")


# ============================================================================
# INTERSECTIONS
# ============================================================================

def test_generator_axes_cross_once():
    print("\n" + "=" * 60); print("TEST 4 - dual generators"); print("=" * 60)
    m = hyperbolic_field(ATLAS, CELLS)
    a, b = shorten_loop(G0, m), shorten_loop(G1, m)
    i_ab = intersection_number(a, b, ATLAS)
    assert int(i_ab) == 1 and not i_ab.indeterminate, i_ab
    assert sigma_intersection(a.isometry, b.isometry, ATLAS) == 1
    assert int(self_intersection_number(a, ATLAS)) == 0
    assert is_simple_class(a.isometry, ATLAS)
    with pytest.raises(LabInputError):
        intersection_number(a, shorten_loop(GroupWord.of((4,)), m), ATLAS)
    print("  PASS: i(g0, g1) = 1, g0 simple")


def _boundary_points(cls):
    """Chord endpoints with each boundary point moved onto its owning side (0..3)"""
    points = []
    for chord in cls.decomposition.chords:
        for x in (chord.entry, chord.exit):
            side = int(np.argmin(ATLAS.side_margins(x)))
            points.append(ATLAS.generator(side - 4).apply(x) if side >= 4 else x)
    return np.array(points)


def _touches_vertex(cls):
    vertices = np.array(ATLAS.vertices)
    return any(np.min(np.abs(vertices - x)) < 1e-6 for x in _boundary_points(cls))


def _disjoint(p, q):
    if chord_crossings(p.decomposition, q.decomposition):
        return False
    a, b = _boundary_points(p), _boundary_points(q)
    return float(np.min(np.abs(a[:, None] - b[None, :]))) > 1e-6


def test_disjoint_systoles():
    print("\n" + "=" * 60); print("TEST 5 - disjoint systolic curves"); print("=" * 60)
    classes = [c for c in classes_up_to_length(ATLAS, SYSTOLE + 1e-6) if not _touches_vertex(c)]
    pairs = [(p, q) for i, p in enumerate(classes) for q in classes[i + 1:] if _disjoint(p, q)]
    assert pairs, "no disjoint pair among the systoles"
    p, q = pairs[0]
    m = hyperbolic_field(ATLAS, CELLS)
    count = intersection_number(shorten_loop(p.word, m), shorten_loop(q.word, m), ATLAS)
    assert int(count) == 0, (p.word.label(), q.word.label(), count)
    print(f"  PASS: {p.word.label()} and {q.word.label()} are disjoint ({len(pairs)} pairs)")


def test_intersection_stable_on_bumpy_metric():
    print("\n" + "=" * 60); print("TEST 6 - intersection number is a class invariant"); print("=" * 60)
    m = random_bump_field(ATLAS, seed=12, cells=CELLS)
    a, b = shorten_loop(G0, m), shorten_loop(G1, m)
    assert int(intersection_number(a, b, ATLAS)) == 1
    print("  PASS")


# ============================================================================
# LENGTH COMPARISONS
# ============================================================================

def test_thick_thin_ratios():
    print("\n" + "=" * 60); print("TEST 7 - thick/thin ratios"); print("=" * 60)
    sigma = hyperbolic_field(ATLAS, CELLS)
    rescaled = normalize_area(hyperbolic_field(ATLAS, CELLS, c=0.3), 4 * math.pi)
    table = thick_thin_probe([G0, G1], [sigma, rescaled])
    assert len(table.rows) == 4
    assert abs(table.summary["C1"] - 1.0) < 1e-5 and abs(table.summary["C2"] - 1.0) < 1e-5, table.summary
    assert abs(table.summary["D"] - SYSTOLE ** 2) < 1e-3, table.summary["D"]
    with tempfile.TemporaryDirectory() as tmp:
        path = table.to_csv(Path(tmp) / "ratios.csv")
        lines = path.read_text().splitlines()
        assert lines[0].split(",")[0] == "key" and len(lines) == 5
    with pytest.raises(LabInputError):
        thick_thin_probe([G0], [sigma, hyperbolic_field(ATLAS, CELLS, c=0.3)])
    assert thick_thin_probe([G0], []).rows == []
    print(f"  PASS: C1 = C2 = 1, D = {table.summary['D']:.4f}")


def test_collar_ratios():
    print("\n" + "=" * 60); print("TEST 8 - collar ratios"); print("=" * 60)
    family = [hyperbolic_field(ATLAS, CELLS), normalize_area(hyperbolic_field(ATLAS, CELLS, c=-0.2), 4 * math.pi)]
    table = collar_probe(G0, G1, family)
    ratios = [row.values["ratio"] for row in table.rows]
    assert all(abs(r - 1.0) < 1e-5 for r in ratios), ratios
    assert table.summary["intersection"] == 1.0
    with pytest.raises(LabInputError):
        collar_probe(G0, GroupWord.of((4,)), family)
    print(f"  PASS: D_L = {table.summary['D_L']:.6f}")


def test_length_ratios_on_smoothing_family():
    print("\n" + "=" * 60); print("TEST 9 - thick/thin and collar ratios along g_k"); print("=" * 60)
    corpus = smoothing_corpus(ATLAS, [2, 4, 8], cells=CELLS)
    table = thick_thin_probe([G0, G1], corpus)
    assert len(table.rows) == 6
    ratios = [row.values["ratio"] for row in table.rows]
    assert all(math.isfinite(r) and r > 0.0 for r in ratios), ratios
    for g in corpus:
        assert 0.0 < table.summary[f"C1[{g.label}]"] <= table.summary[f"C2[{g.label}]"] < math.inf
    assert 0.0 < table.summary["C1"] <= table.summary["C2"] < math.inf, table.summary
    assert 0.0 < table.summary["D"] < math.inf, table.summary["D"]

    collar = collar_probe(G0, G1, corpus)
    assert len(collar.rows) == 3
    assert all(math.isfinite(row.values["ratio"]) and row.values["ratio"] > 0.0 for row in collar.rows)
    assert math.isfinite(collar.summary["D_L"]) and collar.summary["intersection"] == 1.0
    print(f"  PASS: C1 = {table.summary['C1']:.4f}, C2 = {table.summary['C2']:.4f}, "
          f"D = {table.summary['D']:.4f}, D_L = {collar.summary['D_L']:.4f}")


def main():
    test_sigma_systole()
    test_longer_words_keep_the_generator()
    test_homothety_systole()
    test_generator_axes_cross_once()
    test_disjoint_systoles()
    test_intersection_stable_on_bumpy_metric()
    test_thick_thin_ratios()
    test_collar_ratios()
    test_length_ratios_on_smoothing_family()
    print("\nALL TESTS PASSED")


if __name__ == "__main__":
    main()

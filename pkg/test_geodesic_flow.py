#!/usr/bin/env python3
# ============================================================================
# test_geodesic_flow.py - Geodesic flow and loop shortening
# ============================================================================
#   step 1: u = 0 trajectories are sigma-geodesics at unit speed
#   step 2: homotheties rescale time; bump fields conserve speed
#   step 3: deck transitions replay to the cumulative lift
#   step 4: discrete loop length and shorten_loop
#
# RUN: cd ~/bolza-lab ; source venv/bin/activate ; python test_geodesic_flow.py
# ============================================================================

import math
import tempfile
from pathlib import Path
from types import SimpleNamespace

import numpy as np
import pytest

from models import LabInputError
from surface_atlas import SYSTOLE, DiskIsometry, GroupWord, build_bolza_atlas, disk_distance
from conformal_field import flat_cone_field, hyperbolic_field, model_chart_field, random_bump_field, smoothing_corpus
from geodesic_engine import (
    GeodesicFlow,
    TangentState,
    g_speed,
    initial_polyline,
    integrate_geodesic,
    load_geodesic,
    loop_length,
    save_geodesic,
    shorten_loop,
    unit_state,
)

ATLAS = build_bolza_atlas()
CELLS = 40


def test_sigma_geodesics_through_origin():
    print("=" * 60); print("TEST 1 - sigma-geodesics through 0"); print("=" * 60)
    m = hyperbolic_field(ATLAS, CELLS)
    for angle in (0.0, 0.3, 2.0):
        trace = integrate_geodesic(unit_state(m, 0j, angle), 2.5, m)
        path = trace.unfolded()
        off_diameter = np.max(np.abs((path * np.exp(-1j * angle)).imag))
        assert off_diameter < 1e-8, (angle, off_diameter)
        travelled = disk_distance(0j, path[-1])
        assert abs(travelled - 2.5) < 1e-6, travelled
        assert not trace.truncated
        # T = 2.5 leaves the octagon, so at least one deck transition happened
        assert trace.transitions, angle
    print("  PASS: diameters at unit speed, deck transitions recorded")


def test_replay_matches_lift():
    print("\n" + "=" * 60); print("TEST 2 - transition log replay"); print("=" * 60)
    m = random_bump_field(ATLAS, seed=4, cells=CELLS)
    trace = integrate_geodesic(unit_state(m, 0.1 + 0.2j, 1.1), 8.0, m)
    final = DiskIsometry.normalized(complex(trace.lift_a[-1]), complex(trace.lift_b[-1]))
    assert trace.replay().close_to(final, 1e-8)
    # unfolded path is continuous in the cover
    steps = np.abs(np.diff(trace.unfolded()))
    assert np.max(steps) < 0.1, np.max(steps)
    print(f"  PASS: {len(trace.transitions)} transitions replayed")


def test_speed_conservation():
    print("\n" + "=" * 60); print("TEST 3 - g-speed along the flow"); print("=" * 60)
    m = random_bump_field(ATLAS, seed=9, cells=CELLS)
    rng = np.random.default_rng(0)
    z0 = 0.3 * rng.uniform(-1, 1, 8) + 0.3j * rng.uniform(-1, 1, 8)
    angles = rng.uniform(0, 2 * math.pi, 8)
    states = [unit_state(m, z, a) for z, a in zip(z0, angles)]
    result = GeodesicFlow(m).run([s.position for s in states], [s.velocity for s in states], 6.0)
    speeds = g_speed(m, result.z, result.v)
    assert np.max(np.abs(speeds - 1.0)) < 1e-5, speeds
    assert np.allclose(result.t, 6.0)
    print(f"  PASS: max speed drift {np.max(np.abs(speeds - 1.0)):.2e}")


def test_homothety_rescales_time():
    print("\n" + "=" * 60); print("TEST 4 - homothety rescales time"); print("=" * 60)
    c = 0.4
    base = hyperbolic_field(ATLAS, CELLS)
    scaled = hyperbolic_field(ATLAS, CELLS, c=c)
    start, angle = 0.1 - 0.05j, 0.7
    a = integrate_geodesic(unit_state(base, start, angle), 2.0, base).unfolded()[-1]
    b = integrate_geodesic(unit_state(scaled, start, angle), 2.0 * math.exp(c), scaled).unfolded()[-1]
    assert abs(a - b) < 1e-6, (a, b)
    print(f"  PASS: endpoints agree ({abs(a - b):.2e})")


def test_truncation_at_cone():
    print("\n" + "=" * 60); print("TEST 5 - trajectories into the cone"); print("=" * 60)
    m = flat_cone_field(ATLAS, cells=CELLS)
    state = unit_state(m, 0.3 + 0j, math.pi)
    trace = integrate_geodesic(state, 5.0, m)
    assert trace.truncated and trace.reason == "cone exclusion zone"
    assert trace.times[-1] < 5.0
    with pytest.raises(LabInputError):
        GeodesicFlow(m, dt=0.0)
    with pytest.raises(LabInputError):
        integrate_geodesic(state.reversed(), 0.0, m)
    print(f"  PASS: truncated at t = {trace.times[-1]:.3f}")


def test_geodesic_through_smoothed_cap():
    print("\n" + "=" * 60); print("TEST 6 - geodesic through a smoothed cone"); print("=" * 60)
    g = smoothing_corpus(ATLAS, [8], cells=CELLS)[0]
    trace = integrate_geodesic(unit_state(g, 0.3 + 0j, math.pi), 2.0, g)
    assert not trace.truncated
    # steps shrink toward the cone, so the path samples the cap centre
    closest = float(np.min(np.abs(trace.positions)))
    assert closest < 1e-2 * g.patch.extent, closest
    speed = g_speed(g, trace.positions, trace.velocities)
    assert np.max(np.abs(speed - 1.0)) < 1e-3, np.max(np.abs(speed - 1.0))
    print(f"  PASS: closest approach {closest:.2e}, {trace.times.size} steps")


def test_loop_length():
    print("\n" + "=" * 60); print("TEST 7 - discrete loop length"); print("=" * 60)
    m = hyperbolic_field(ATLAS, CELLS)
    point = SimpleNamespace(vertices=np.full(8, 0.1 + 0.1j), isometry=DiskIsometry.identity())
    assert loop_length(point, m) == 0.0
    loop = initial_polyline(GroupWord.of((0,)), m)
    assert abs(loop_length(loop, m) - SYSTOLE) < 1e-4
    assert abs(loop_length(loop.power(2), m) - 2 * loop_length(loop, m)) < 1e-6
    with pytest.raises(LabInputError):
        loop_length(loop, model_chart_field(cells=40))
    with pytest.raises(LabInputError):
        initial_polyline(GroupWord.of((0, 4)), m)
    print(f"  PASS: axis polyline length {loop_length(loop, m):.6f}")


def test_shorten_loop():
    print("\n" + "=" * 60); print("TEST 8 - shorten_loop"); print("=" * 60)
    m = hyperbolic_field(ATLAS, CELLS)
    for k in (0, 1):
        g = shorten_loop(GroupWord.of((k,)), m)
        assert abs(g.length - SYSTOLE) < 1e-4, g.length
    c = 0.25
    scaled = shorten_loop(GroupWord.of((2,)), hyperbolic_field(ATLAS, CELLS, c=c))
    assert abs(scaled.length - math.exp(c) * SYSTOLE) < 1e-5, scaled.length

    # a bent start on a bumpy metric: descent only ever lowers the length
    bumps = random_bump_field(ATLAS, seed=2, cells=CELLS)
    bent = shorten_loop(GroupWord.of((0, 1)), bumps, seed=3, jitter=0.5)
    history = bent.history
    assert all(b <= a + 1e-12 for a, b in zip(history, history[1:]))
    assert bent.length <= history[0]
    assert bent.closure_defect(ATLAS) < 1e-9
    print(f"  PASS: {len(history) - 1} descent steps, {history[0]:.5f} -> {bent.length:.5f}")


def test_geodesic_file_roundtrip():
    print("\n" + "=" * 60); print("TEST 9 - geodesic files"); print("=" * 60)
    m = hyperbolic_field(ATLAS, CELLS)
    g = shorten_loop(GroupWord.of((3,)), m)
    with tempfile.TemporaryDirectory() as tmp:
        path = save_geodesic(g, Path(tmp) / "g3")
        again = load_geodesic(path)
        assert again.word == g.word
        assert np.array_equal(again.vertices, g.vertices)
        assert abs(loop_length(again, m) - g.length) < 1e-12
        with pytest.raises(LabInputError):
            load_geodesic(Path(tmp) / "missing.json")
    print("  PASS")


def main():
    test_sigma_geodesics_through_origin()
    test_replay_matches_lift()
    test_speed_conservation()
    test_homothety_rescales_time()
    test_truncation_at_cone()
    test_geodesic_through_smoothed_cap()
    test_loop_length()
    test_shorten_loop()
    test_geodesic_file_roundtrip()
    print("\nALL TESTS PASSED")


if __name__ == "__main__":
    main()

# ============================================================================
# geodesic_engine/intersections.py - Crossing counts of closed loops
# ============================================================================
# Every segment is moved by the deck map that takes its first vertex into the
# octagon, then copied by the 49 neighbour tiles. A crossing on the surface
# has exactly one pair of lifted segments meeting at a point of the
# half-open octagon, so each crossing is counted once.
# ============================================================================

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from models import LabInputError
from surface_atlas.isometry import apply_batch
from surface_atlas.octagon import VERTEX_RADIUS, FundamentalOctagon
from surface_atlas.classes import chord_crossings, chord_walk, neighbor_tiles
from geodesic_engine.loops import ClosedGeodesic

logger = logging.getLogger(__name__)

ANGLE_TOLERANCE = 1e-3          # |sin| of the crossing angle below which a crossing is indeterminate
NEAR_MARGIN = 0.05
END_GUARD = 1e-12


@dataclass(frozen=True)
class IntersectionResult:
    count: int
    indeterminate: bool = False
    min_sine: float = 1.0

    def __int__(self) -> int:
        return self.count


def _lifted_segments(g: ClosedGeodesic, atlas: FundamentalOctagon):
    """(p, q, segment index) for every lift of every segment near the octagon"""
    p = g.vertices
    q = np.concatenate([p[1:], [g.isometry.apply(p[0])]])
    w, a, b = atlas.canonicalize_batch(p)
    q = apply_batch(a, b, q)
    index = np.arange(p.size)
    ps, qs, ids = [], [], []
    for tile in neighbor_tiles(atlas):
        tp, tq = tile.apply(w), tile.apply(q)
        near = np.minimum(np.abs(tp), np.abs(tq)) <= VERTEX_RADIUS + NEAR_MARGIN
        ps.append(tp[near])
        qs.append(tq[near])
        ids.append(index[near])
    return np.concatenate(ps), np.concatenate(qs), np.concatenate(ids)


def _cross(u, v):
    return u.real * v.imag - u.imag * v.real


def _crossings(p1, q1, p2, q2, atlas: FundamentalOctagon, pair_filter=None) -> IntersectionResult:
    d1 = (q1 - p1)[:, None]
    d2 = (q2 - p2)[None, :]
    r = p2[None, :] - p1[:, None]
    denom = _cross(d1, d2)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = _cross(r, d2) / denom
        t = _cross(r, d1) / denom
    hit = (s >= 0) & (s < 1 - END_GUARD) & (t >= 0) & (t < 1 - END_GUARD) & np.isfinite(s) & np.isfinite(t)
    if pair_filter is not None:
        hit &= pair_filter
    if not np.any(hit):
        return IntersectionResult(0)
    i, j = np.nonzero(hit)
    x = p1[i] + s[i, j] * (q1[i] - p1[i])
    owned = atlas.contains_half_open(x)
    sines = np.abs(denom[i, j]) / (np.abs(d1[i, 0]) * np.abs(d2[0, j]))
    sines = sines[owned]
    indeterminate = bool(np.any(sines < ANGLE_TOLERANCE))
    if indeterminate:
        logger.warning(f"⚠️ Near-tangential crossing (sin = {float(np.min(sines)):.2e}); count is indeterminate")
    return IntersectionResult(int(np.count_nonzero(owned)), indeterminate,
                              float(np.min(sines)) if sines.size else 1.0)


def _same_class(a: ClosedGeodesic, b: ClosedGeodesic, atlas: FundamentalOctagon) -> bool:
    return chord_walk(a.isometry, atlas).fingerprint == chord_walk(b.isometry, atlas).fingerprint


def intersection_number(a: ClosedGeodesic, b: ClosedGeodesic, atlas: FundamentalOctagon) -> IntersectionResult:
    """Transverse crossings between two closed polylines of different classes"""
    if _same_class(a, b, atlas):
        raise LabInputError("intersection_number needs two different classes; use self_intersection_number")
    p1, q1, _ = _lifted_segments(a, atlas)
    p2, q2, _ = _lifted_segments(b, atlas)
    return _crossings(p1, q1, p2, q2, atlas)


def self_intersection_number(a: ClosedGeodesic, atlas: FundamentalOctagon) -> IntersectionResult:
    p, q, ids = _lifted_segments(a, atlas)
    # each self-crossing pairs two distinct segments; keep the ordered pair with the lower index first
    return _crossings(p, q, p, q, atlas, pair_filter=ids[:, None] < ids[None, :])


# ---- sigma-geodesic oracle -----------------------------------------------------

def sigma_intersection(a, b, atlas: FundamentalOctagon) -> int:
    """Geometric intersection number of the classes of two isometries"""
    return chord_crossings(chord_walk(a, atlas), chord_walk(b, atlas))


def is_simple_class(h, atlas: FundamentalOctagon) -> bool:
    return chord_crossings(chord_walk(h, atlas)) == 0

# ============================================================================
# surface_atlas/classes.py - Closed sigma-geodesics as chords of the octagon
# ============================================================================
# A hyperbolic deck transformation's axis, followed through the tiling and
# pulled back into the octagon after every side crossing, cuts the domain in
# finitely many chords. The set of chord lines identifies the surface class
# (conjugacy in the surface group, up to inversion), which free-group words
# cannot do on their own.

import logging
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from models import LabInputError, LabRangeError
from surface_atlas.isometry import (
    DiskIsometry,
    apply_batch,
    compose_batch,
    disk_distance,
    translation_length,
)
from surface_atlas.octagon import (
    CIRCUMRADIUS,
    INRADIUS,
    SIDES,
    FundamentalOctagon,
    inverse_index,
)
from surface_atlas.words import GroupWord, word_to_isometry

logger = logging.getLogger(__name__)

KLEIN_SIDE_OFFSET = math.tanh(INRADIUS)
MAX_CHORDS = 4096
LINE_DIGITS = 6
LENGTH_DIGITS = 5


# ---- Klein model -----------------------------------------------------------

def to_klein(z):
    z = np.asarray(z, dtype=complex)
    return 2.0 * z / (1.0 + np.abs(z) ** 2)


def from_klein(k):
    k = np.asarray(k, dtype=complex)
    return k / (1.0 + np.sqrt(np.maximum(0.0, 1.0 - np.abs(k) ** 2)))


def clip_line(e1: complex, e2: complex) -> Optional[Tuple[float, float, int, int]]:
    """Clip the Klein chord e1 -> e2 against the octagon (a convex polygon there).

    Returns (t_in, t_out, side_in, side_out) or None when the line misses.
    """
    d = e2 - e1
    t_in, t_out = 0.0, 1.0
    side_in, side_out = -1, -1
    for k in range(SIDES):
        rot = complex(math.cos(k * math.pi / 4), -math.sin(k * math.pi / 4))
        alpha = KLEIN_SIDE_OFFSET - (e1 * rot).real
        beta = (d * rot).real
        if abs(beta) < 1e-15:
            if alpha < 0:
                return None
            continue
        t = alpha / beta
        if beta > 0 and t < t_out:
            t_out, side_out = t, k
        elif beta < 0 and t > t_in:
            t_in, side_in = t, k
    if t_in >= t_out or side_out < 0:
        return None
    return t_in, t_out, side_in, side_out


def closest_point_to_origin(e1: complex, e2: complex) -> complex:
    """Point of the geodesic with ideal endpoints e1, e2 nearest to 0"""
    s = e1 + e2
    if abs(s) < 1e-14:
        return 0j
    u = s / abs(s)
    cos_phi = abs(s) / 2.0
    sin_phi = abs(e1 - e2) / 2.0
    return u * (1.0 - sin_phi) / cos_phi


def point_on_axis(e1: complex, e2: complex, base: complex, t: np.ndarray) -> np.ndarray:
    """Points at signed distance t from `base` along the geodesic e1 -> e2"""
    # move base to 0; the geodesic becomes a diameter
    q2 = (e2 - base) / (1.0 - np.conj(base) * e2)
    q2 = q2 / abs(q2)
    w = np.tanh(np.asarray(t, dtype=float) / 2.0) * q2
    return (w + base) / (1.0 + np.conj(base) * w)


# ---- chord decomposition ---------------------------------------------------

@dataclass(frozen=True)
class Chord:
    entry: complex
    exit: complex
    side_in: int
    side_out: int
    line: Tuple[complex, complex]
    length: float


@dataclass(frozen=True)
class ChordDecomposition:
    chords: Tuple[Chord, ...]
    word: Tuple[int, ...]
    length: float

    @property
    def fingerprint(self) -> Tuple[float, FrozenSet]:
        return round(self.length, LENGTH_DIGITS), frozenset(line_key(*c.line) for c in self.chords)

    def line_keys(self) -> List[Tuple]:
        return [line_key(*c.line) for c in self.chords]


def _point_key(z: complex) -> Tuple[float, float]:
    return round(z.real, LINE_DIGITS) + 0.0, round(z.imag, LINE_DIGITS) + 0.0


def line_key(e1: complex, e2: complex) -> Tuple:
    """Unoriented key of the line with ideal endpoints e1, e2"""
    return tuple(sorted((_point_key(e1), _point_key(e2))))


def lift_through_domain(h: DiskIsometry, atlas: FundamentalOctagon) -> Tuple[complex, complex]:
    """Endpoints (repelling, attracting) of a lift of h's axis that meets the octagon"""
    e1, e2 = h.fixed_points()
    p = closest_point_to_origin(e1, e2)
    _, a, b = atlas.canonicalize_batch(np.array([p]))
    e1, e2 = apply_batch(a[0], b[0], e1), apply_batch(a[0], b[0], e2)
    return complex(e1 / abs(e1)), complex(e2 / abs(e2))


def chord_walk(h: DiskIsometry, atlas: FundamentalOctagon,
               start: Optional[Tuple[complex, complex]] = None) -> ChordDecomposition:
    """Follow the closed geodesic of h through the octagon until the first chord line recurs"""
    if translation_length(h) <= 1e-12:
        raise LabInputError("Trivial or elliptic element has no closed geodesic")
    e1, e2 = start if start is not None else lift_through_domain(h, atlas)
    first = (e1, e2)
    chords: List[Chord] = []
    letters: List[int] = []
    for _ in range(MAX_CHORDS):
        clipped = clip_line(e1, e2)
        if clipped is None:
            if not chords:
                raise LabRangeError("Axis lift does not meet the octagon")
            raise LabRangeError("Chord walk left the octagon; numerical drift near a vertex")
        t_in, t_out, side_in, side_out = clipped
        entry = complex(from_klein(e1 + t_in * (e2 - e1)))
        leave = complex(from_klein(e1 + t_out * (e2 - e1)))
        chords.append(Chord(entry, leave, side_in, side_out, (e1, e2), disk_distance(entry, leave)))
        letters.append(side_out)
        pull = atlas.generator(inverse_index(side_out))
        e1, e2 = complex(pull.apply(e1)), complex(pull.apply(e2))
        e1, e2 = e1 / abs(e1), e2 / abs(e2)
        if abs(e1 - first[0]) < 1e-7 and abs(e2 - first[1]) < 1e-7:
            total = float(sum(c.length for c in chords))
            return ChordDecomposition(tuple(chords), tuple(letters), total)
    raise LabRangeError(f"Chord walk did not close after {MAX_CHORDS} chords")


@dataclass
class GeodesicClass:
    """One closed sigma-geodesic (unoriented, primitive)"""
    word: GroupWord
    isometry: DiskIsometry
    length: float
    decomposition: ChordDecomposition
    aliases: List[GroupWord] = field(default_factory=list)


def distinct_geodesic_classes(words: Iterable[GroupWord], atlas: FundamentalOctagon,
                              primitive_only: bool = True) -> List[GeodesicClass]:
    """Merge free words that give the same closed geodesic; keeps first-seen words"""
    by_print: Dict[Tuple, GeodesicClass] = {}
    order: List[Tuple] = []
    skipped_trivial = 0
    for w in words:
        h = word_to_isometry(w, atlas)
        ell = translation_length(h)
        if ell <= 1e-9:
            skipped_trivial += 1
            continue
        walk = chord_walk(h, atlas)
        if primitive_only and ell > walk.length * 1.5:
            continue
        key = walk.fingerprint
        if key in by_print:
            by_print[key].aliases.append(w)
            continue
        by_print[key] = GeodesicClass(word=w, isometry=h, length=ell, decomposition=walk)
        order.append(key)
    if skipped_trivial:
        logger.info(f"Skipped {skipped_trivial} words trivial in the surface group")
    return [by_print[k] for k in order]


# ---- tiles and orbit balls -------------------------------------------------

def _orbit_key(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    z = b / np.conj(a)
    return np.round(np.stack([z.real, z.imag], axis=-1) * 1e9).astype(np.int64)


def orbit_ball(atlas: FundamentalOctagon, radius: float) -> Tuple[np.ndarray, np.ndarray]:
    """All deck transformations h with d(0, h 0) <= radius, as arrays (a, b).

    Breadth-first over tile adjacency (h -> h g_k); tiles whose centres lie
    beyond radius + circumradius are never needed to reach the ball.
    """
    if radius < 0:
        raise LabInputError("radius must be non-negative")
    prune = radius + CIRCUMRADIUS + 1e-9
    gen_a = np.array([g.a for g in atlas.generators])
    gen_b = np.array([g.b for g in atlas.generators])
    seen = {(0, 0)}
    all_a, all_b = [np.array([1.0 + 0j])], [np.array([0j])]
    front_a, front_b = all_a[0], all_b[0]
    while front_a.size:
        na, nb = compose_batch(np.repeat(front_a, SIDES), np.repeat(front_b, SIDES),
                               np.tile(gen_a, front_a.size), np.tile(gen_b, front_a.size))
        dist = 2.0 * np.arccosh(np.maximum(1.0, np.abs(na)))
        keep = dist <= prune
        na, nb = na[keep], nb[keep]
        keys = _orbit_key(na, nb)
        fresh = np.zeros(na.size, dtype=bool)
        for i, key in enumerate(map(tuple, keys)):
            if key not in seen:
                seen.add(key)
                fresh[i] = True
        front_a, front_b = na[fresh], nb[fresh]
        all_a.append(front_a)
        all_b.append(front_b)
    a = np.concatenate(all_a)
    b = np.concatenate(all_b)
    dist = 2.0 * np.arccosh(np.maximum(1.0, np.abs(a)))
    inside = dist <= radius + 1e-9
    logger.info(f"Orbit ball of radius {radius:.3f}: {int(inside.sum())} elements")
    return a[inside], b[inside]


def neighbor_tiles(atlas: FundamentalOctagon) -> List[DiskIsometry]:
    """Identity plus the 48 tiles sharing a side or a vertex with the octagon"""
    a, b = orbit_ball(atlas, 2.0 * CIRCUMRADIUS + 1e-6)
    dist = 2.0 * np.arccosh(np.maximum(1.0, np.abs(a)))
    order = np.argsort(dist, kind="stable")
    return [DiskIsometry.normalized(complex(a[i]), complex(b[i])) for i in order]


def word_axis_polyline(h: DiskIsometry, atlas: FundamentalOctagon, n: int) -> Tuple[np.ndarray, DiskIsometry]:
    """n points on the sigma-axis of a domain lift of h, one period long.

    Returns (points, conjugated isometry) with points[k + 1] following
    points[k] and the closing point being isometry(points[0]).
    """
    e1, e2 = lift_through_domain(h, atlas)
    base = closest_point_to_origin(e1, e2)
    # the lift's own element: conjugate h so its axis is (e1, e2)
    lifted = conjugate_to_axis(h, e1, e2)
    ell = translation_length(h)
    # centred on the point nearest 0 to keep vertices away from the ideal boundary
    t = np.arange(n) * (ell / n) - 0.5 * ell
    return point_on_axis(e1, e2, base, t), lifted


def conjugate_to_axis(h: DiskIsometry, e1: complex, e2: complex) -> DiskIsometry:
    """Hyperbolic element with axis e1 -> e2 and the translation length of h"""
    ell = translation_length(h)
    base = closest_point_to_origin(e1, e2)
    q2 = (e2 - base) / (1.0 - base.conjugate() * e2)
    direction = math.atan2(q2.imag, q2.real)
    move = DiskIsometry(1.0 + 0j, base) if base != 0 else DiskIsometry.identity()
    move = DiskIsometry.normalized(move.a, move.b)
    shift = DiskIsometry.translation(ell, direction)
    return move @ shift @ move.inverse()


# ---- crossings -------------------------------------------------------------

def _klein_segments_cross(a1: complex, a2: complex, b1: complex, b2: complex) -> bool:
    d1, d2 = a2 - a1, b2 - b1
    denom = d1.real * d2.imag - d1.imag * d2.real
    if abs(denom) < 1e-15:
        return False
    r = b1 - a1
    s = (r.real * d2.imag - r.imag * d2.real) / denom
    t = (r.real * d1.imag - r.imag * d1.real) / denom
    return 1e-12 < s < 1 - 1e-12 and 1e-12 < t < 1 - 1e-12


def chord_crossings(first: ChordDecomposition, second: Optional[ChordDecomposition] = None) -> int:
    """Crossings of closed sigma-geodesics counted chord by chord (chords are straight in the Klein model).

    With one argument counts self-crossings.
    """
    def klein(dec):
        return [(complex(to_klein(c.entry)), complex(to_klein(c.exit))) for c in dec.chords]

    A = klein(first)
    if second is None:
        return sum(_klein_segments_cross(*A[i], *A[j]) for i in range(len(A)) for j in range(i + 1, len(A)))
    B = klein(second)
    return sum(_klein_segments_cross(*x, *y) for x in A for y in B)


def classes_up_to_length(atlas: FundamentalOctagon, max_length: float) -> List[GeodesicClass]:
    """Every primitive closed sigma-geodesic of length <= max_length, shortest first.

    A class of length l has a lift whose axis meets the octagon, and that
    element moves 0 by at most l + 2 circumradius. Each class is walked once:
    elements whose axis is already a known chord line are skipped.
    """
    a, b = orbit_ball(atlas, max_length + 2.0 * CIRCUMRADIUS)
    half_trace = np.abs(a.real)
    lengths = np.where(half_trace > 1.0, 2.0 * np.arccosh(np.maximum(half_trace, 1.0)), 0.0)
    order = np.argsort(lengths, kind="stable")
    known_lines = set()
    found: List[GeodesicClass] = []
    for i in order:
        ell = float(lengths[i])
        if ell <= 1e-9:
            continue
        if ell > max_length:
            break
        h = DiskIsometry.normalized(complex(a[i]), complex(b[i]))
        e1, e2 = h.fixed_points()
        if clip_line(e1, e2) is None:
            continue
        if line_key(e1, e2) in known_lines:
            continue
        walk = chord_walk(h, atlas, start=(e1, e2))
        known_lines.update(walk.line_keys())
        if ell > 1.5 * walk.length:
            continue    # a proper power; its root came earlier
        word = GroupWord.of(walk.word)
        found.append(GeodesicClass(word=word, isometry=h, length=ell, decomposition=walk))
    logger.info(f"{len(found)} primitive classes of sigma-length <= {max_length:.3f}")
    return found

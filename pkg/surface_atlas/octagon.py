# ============================================================================
# surface_atlas/octagon.py - Regular pi/4 octagon of the Bolza surface
# ============================================================================
# Layout (disk chart, counter-clockwise):
#   side k      midpoint direction theta_k = k*pi/4, endpoints V_{k-1}, V_k
#   vertex V_j  direction pi/8 + j*pi/4
#   g_k         translation by the systole length toward theta_k; maps side
#               k+4 onto side k, g_k(V_{k+3}) = V_k and g_k(V_{k+4}) = V_{k-1}
#   inverse     g_k^{-1} = g_{(k+4) % 8}
#   relation    g0 g3 g6 g1 g4 g7 g2 g5 = 1   (vertex cycle V0 -> V5 -> ... -> V0)
# ============================================================================

import json
import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from models import LabRangeError, LabInputError
from surface_atlas.isometry import DiskIsometry, apply_batch, compose_batch

logger = logging.getLogger(__name__)

ATLAS_SCHEMA = "bolza-atlas/1"

GENUS = 2
CHI = 2 - 2 * GENUS
SIDES = 8
INTERIOR_ANGLE = math.pi / 4

# center -> side midpoint (inradius) and center -> vertex (circumradius)
INRADIUS = math.acosh(1.0 + math.sqrt(2.0))
CIRCUMRADIUS = math.acosh(1.0 / math.tan(math.pi / 8) ** 2)
SYSTOLE = 2.0 * INRADIUS
MIDPOINT_RADIUS = math.tanh(INRADIUS / 2.0)       # Euclidean
VERTEX_RADIUS = math.tanh(CIRCUMRADIUS / 2.0)     # = 2**-0.25

# side k lies on the circle |z - SIDE_CENTER e^{i theta_k}| = SIDE_RADIUS,
# orthogonal to the unit circle
SIDE_CENTER = 0.5 * (MIDPOINT_RADIUS + 1.0 / MIDPOINT_RADIUS)
SIDE_RADIUS = 0.5 * (1.0 / MIDPOINT_RADIUS - MIDPOINT_RADIUS)

RELATION_WORD = (0, 3, 6, 1, 4, 7, 2, 5)

EDGE_TOLERANCE = 1e-12
RANGE_LIMIT = 1.0 - 1e-9
MAX_REDUCTION_STEPS = 512


def inverse_index(k: int) -> int:
    return (k + SIDES // 2) % SIDES


@dataclass(frozen=True)
class SurfacePoint:
    z: complex
    in_domain: bool


@dataclass(frozen=True)
class FundamentalOctagon:
    vertices: Tuple[complex, ...]
    generators: Tuple[DiskIsometry, ...]
    chi: int = CHI
    orientation: str = "ccw"
    relation: Tuple[int, ...] = RELATION_WORD

    def __post_init__(self):
        if len(self.vertices) != SIDES or len(self.generators) != SIDES:
            raise LabInputError("Octagon needs 8 vertices and 8 side pairings")

    # ---- geometry ----------------------------------------------------------

    @property
    def side_centers(self) -> np.ndarray:
        k = np.arange(SIDES)
        return SIDE_CENTER * np.exp(1j * k * math.pi / 4)

    @property
    def area(self) -> float:
        """sigma-area by Gauss-Bonnet for K = -1"""
        return -2.0 * math.pi * self.chi

    @property
    def systole(self) -> float:
        return SYSTOLE

    def generator(self, k: int) -> DiskIsometry:
        if not 0 <= k < SIDES:
            raise LabInputError(f"Generator index {k} outside 0..7")
        return self.generators[k]

    def side_endpoints(self, k: int) -> Tuple[complex, complex]:
        return self.vertices[(k - 1) % SIDES], self.vertices[k]

    def side_midpoint(self, k: int) -> complex:
        return MIDPOINT_RADIUS * complex(math.cos(k * math.pi / 4), math.sin(k * math.pi / 4))

    def interior_angles(self) -> np.ndarray:
        """Angle at each vertex between its two bounding side circles"""
        centers = self.side_centers
        angles = []
        for j, v in enumerate(self.vertices):
            r1 = v - centers[j]
            r2 = v - centers[(j + 1) % SIDES]
            between = abs(np.angle(r2 / r1))
            angles.append(math.pi - between)
        return np.array(angles)

    # ---- membership --------------------------------------------------------

    def side_margins(self, z) -> np.ndarray:
        """|z - c_k| - R per side; negative means z lies beyond side k"""
        z = np.asarray(z, dtype=complex)
        return np.abs(z[..., None] - self.side_centers) - SIDE_RADIUS

    def contains(self, z, tol: float = 1e-12):
        """Closed membership predicate (vectorised)"""
        return np.all(self.side_margins(z) >= -tol, axis=-1)

    def contains_half_open(self, z, tol: float = 1e-12):
        """Each boundary point is owned by exactly one of its pair of sides (k < 4)"""
        margins = self.side_margins(z)
        closed_part = np.all(margins[..., :4] >= -tol, axis=-1)
        open_part = np.all(margins[..., 4:] > tol, axis=-1)
        return closed_part & open_part

    # ---- reduction ---------------------------------------------------------

    def canonicalize_batch(self, z):
        """Reduce points into the octagon.

        Returns (w, a, b) with w = h(z) inside the domain and h = (a, b) the
        deck transformation used. Raises LabRangeError near the ideal boundary.
        """
        z = np.array(z, dtype=complex, ndmin=1)
        if np.any(np.abs(z) >= RANGE_LIMIT):
            worst = float(np.max(np.abs(z)))
            raise LabRangeError(f"Point at |z| = {worst:.12f} is beyond reach of the domain orbit")
        a = np.ones_like(z)
        b = np.zeros_like(z)
        gen_a = np.array([g.a for g in self.generators])
        gen_b = np.array([g.b for g in self.generators])
        for _ in range(MAX_REDUCTION_STEPS):
            margins = self.side_margins(z)
            worst_side = np.argmin(margins, axis=-1)
            worst = np.take_along_axis(margins, worst_side[..., None], axis=-1)[..., 0]
            active = worst < -EDGE_TOLERANCE
            if not np.any(active):
                return z, a, b
            pull = (worst_side[active] + SIDES // 2) % SIDES
            ga, gb = gen_a[pull], gen_b[pull]
            z[active] = apply_batch(ga, gb, z[active])
            na, nb = compose_batch(ga, gb, a[active], b[active])
            # keep |a|^2 - |b|^2 = 1 against drift
            scale = np.sqrt(np.abs(na) ** 2 - np.abs(nb) ** 2)
            a[active], b[active] = na / scale, nb / scale
        raise LabRangeError(f"Domain reduction did not terminate in {MAX_REDUCTION_STEPS} steps")

    # ---- serialisation -----------------------------------------------------

    def to_json(self) -> str:
        payload = {
            "schema": ATLAS_SCHEMA,
            "chi": self.chi,
            "orientation": self.orientation,
            "vertices": [[v.real, v.imag] for v in self.vertices],
            "generators": [g.to_dict() for g in self.generators],
            "relation": list(self.relation),
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "FundamentalOctagon":
        data = json.loads(text)
        if data.get("schema") != ATLAS_SCHEMA:
            raise LabInputError(f"Unsupported atlas schema {data.get('schema')!r}, expected {ATLAS_SCHEMA}")
        return cls(
            vertices=tuple(complex(*v) for v in data["vertices"]),
            generators=tuple(DiskIsometry.from_dict(g) for g in data["generators"]),
            chi=data["chi"],
            orientation=data["orientation"],
            relation=tuple(data["relation"]),
        )


def build_bolza_atlas() -> FundamentalOctagon:
    """Regular octagon with angles pi/4 centred at 0, opposite sides paired"""
    vertices = tuple(
        VERTEX_RADIUS * complex(math.cos(math.pi / 8 + j * math.pi / 4), math.sin(math.pi / 8 + j * math.pi / 4))
        for j in range(SIDES)
    )
    generators = tuple(DiskIsometry.translation(SYSTOLE, k * math.pi / 4) for k in range(SIDES))
    atlas = FundamentalOctagon(vertices=vertices, generators=generators)
    logger.info(f"✅ Bolza atlas built: chi={atlas.chi}, area={atlas.area:.5f}, systole={SYSTOLE:.5f}")
    return atlas


def canonicalize(p: complex, atlas: FundamentalOctagon) -> Tuple[SurfacePoint, DiskIsometry]:
    """Domain representative of p and the deck transformation that produced it"""
    if abs(p) >= 1.0:
        raise LabRangeError(f"Point {p} is not in the open disk")
    w, a, b = atlas.canonicalize_batch(np.array([p], dtype=complex))
    h = DiskIsometry.normalized(complex(a[0]), complex(b[0]))
    return SurfacePoint(z=complex(w[0]), in_domain=True), h

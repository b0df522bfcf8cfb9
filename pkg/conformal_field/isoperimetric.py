# ============================================================================
# conformal_field/isoperimetric.py - Isoperimetric ratios of embedded regions
# ============================================================================

import logging
import math
from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np
from numpy.polynomial.legendre import leggauss

from models import Background, LabInputError
from surface_atlas.octagon import INRADIUS
from conformal_field.field import MetricField

logger = logging.getLogger(__name__)

BOUNDARY_POINTS = 512
RADIAL_PIECES = 8
RADIAL_POINTS = 12
ANGULAR_POINTS = 128
EDGE_PIECES = 8
EDGE_POINTS = 8
MASK_POINTS = 384               # per side of the bounding box

# (boundary points, boundary weights, interior points, interior weights)
Quadrature = Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]


@dataclass(frozen=True)
class DiskRegion:
    """Round disk: sigma-radius on the surface, Euclidean radius in a flat chart"""
    center: complex
    radius: float
    background: Background = Background.HYPERBOLIC

    @property
    def euclidean_radius(self) -> float:
        """Radius of the model disk |w| < t mapped onto the region"""
        if self.background == Background.HYPERBOLIC:
            return math.tanh(self.radius / 2.0)
        return self.radius

    def mapped(self, w):
        """(points, |derivative|) of the chart map from |w| < t onto the region"""
        w = np.asarray(w, dtype=complex)
        c = self.center
        if self.background == Background.FLAT:
            return c + w, np.ones(w.shape)
        denom = 1.0 + np.conj(c) * w
        return (w + c) / denom, (1.0 - abs(c) ** 2) / np.abs(denom) ** 2

    def boundary(self, n: int = BOUNDARY_POINTS) -> np.ndarray:
        theta = 2.0 * math.pi * np.arange(n) / n
        points, _ = self.mapped(self.euclidean_radius * np.exp(1j * theta))
        return points


@dataclass(frozen=True)
class PolygonRegion:
    """
    Region bounded by a closed polyline with straight edges in the disk
    (surface) or chart coordinates. The last vertex joins the first.
    """
    vertices: Tuple[complex, ...]
    background: Background = Background.HYPERBOLIC

    @classmethod
    def of(cls, vertices: Sequence[complex], background: Background = Background.HYPERBOLIC) -> "PolygonRegion":
        return cls(tuple(complex(v) for v in vertices), background)

    @property
    def points(self) -> np.ndarray:
        return np.asarray(self.vertices, dtype=complex)

    def signed_area(self) -> float:
        """Euclidean shoelace area in the coordinates of the vertices"""
        p = self.points
        return 0.5 * float(np.sum((np.conj(p) * np.roll(p, -1)).imag))

    def contains(self, z) -> np.ndarray:
        """Crossing-number test, one pass over the query points per edge"""
        z = np.asarray(z, dtype=complex)
        x, y = z.real, z.imag
        inside = np.zeros(z.shape, dtype=bool)
        for a, b in zip(self.vertices, self.vertices[1:] + self.vertices[:1]):
            if a.imag == b.imag:
                continue
            straddles = (a.imag > y) != (b.imag > y)
            x_cross = a.real + (y - a.imag) * (b.real - a.real) / (b.imag - a.imag)
            inside ^= straddles & (x < x_cross)
        return inside

    def is_simple(self) -> bool:
        """No two non-adjacent edges meet; adjacent edges share only their vertex"""
        p = self.points
        n = p.size
        q = np.roll(p, -1)
        d = q - p

        def cross(a, b):
            return (np.conj(a) * b).imag

        i, j = np.triu_indices(n, k=1)
        adjacent = (j == i + 1) | ((i == 0) & (j == n - 1))
        o1 = cross(d[i], p[j] - p[i])
        o2 = cross(d[i], q[j] - p[i])
        o3 = cross(d[j], p[i] - p[j])
        o4 = cross(d[j], q[i] - p[j])
        meet = (o1 * o2 <= 0) & (o3 * o4 <= 0)
        collinear = (o1 == 0) & (o2 == 0)
        # collinear edges meet only when their projections overlap
        t0 = (np.conj(d[i]) * (p[j] - p[i])).real / np.abs(d[i]) ** 2
        t1 = (np.conj(d[i]) * (q[j] - p[i])).real / np.abs(d[i]) ** 2
        overlap = (np.maximum(t0, t1) >= 0) & (np.minimum(t0, t1) <= 1)
        meet = np.where(collinear, overlap, meet)
        if np.any(meet & ~adjacent):
            return False
        # adjacent edges folding back onto each other
        folded = adjacent & collinear & ((np.conj(d[i]) * d[j]).real < 0)
        return not np.any(folded)


Region = Union[DiskRegion, PolygonRegion]


@dataclass(frozen=True)
class IsoperimetricResult:
    area: float
    length: float
    positive_mass: float
    ratio: float                 # 4 pi A / L^2
    alexandrov_ratio: float      # 2 (2 pi - K+) A / L^2


def _sigma_distance(a: complex, z: np.ndarray) -> np.ndarray:
    return 2.0 * np.arctanh(np.abs((z - a) / (1.0 - np.conj(a) * z)))


def _validate_disk(region: DiskRegion, m: MetricField):
    if not region.radius > 0:
        raise LabInputError("Disk radius must be positive")
    if region.background == Background.HYPERBOLIC:
        if region.radius >= INRADIUS:
            raise LabInputError(f"A sigma-disk of radius {region.radius} is not embedded (limit {INRADIUS:.5f})")
        if abs(region.center) >= 1.0:
            raise LabInputError("Disk centre outside the unit disk")
    elif abs(region.center) + region.radius >= m.grid.extent:
        raise LabInputError("Disk leaves the chart")


def _validate_polygon(region: PolygonRegion, m: MetricField):
    p = region.points
    if p.size < 3:
        raise LabInputError(f"A polygon needs at least 3 vertices, got {p.size}")
    if not np.all(np.isfinite(p)):
        raise LabInputError("Polygon vertices must be finite")
    if np.any(np.abs(np.roll(p, -1) - p) == 0.0):
        raise LabInputError("Polygon has a repeated vertex")
    if abs(region.signed_area()) == 0.0:
        raise LabInputError("Polygon encloses no area")
    if not region.is_simple():
        raise LabInputError("Polygon boundary is not simple")
    if region.background == Background.HYPERBOLIC:
        if np.any(np.abs(p) >= 1.0):
            raise LabInputError("Polygon vertex outside the unit disk")
        # sigma-balls are Euclidean disks, so the polygon sits in the ball around its first vertex
        reach = float(np.max(_sigma_distance(p[0], p)))
        if reach >= INRADIUS:
            raise LabInputError(f"Polygon spans sigma-distance {reach:.5f}; not embedded (limit {INRADIUS:.5f})")
    elif np.any(np.abs(p) >= m.grid.extent):
        raise LabInputError("Polygon leaves the chart")


def _disk_quadrature(region: DiskRegion) -> Quadrature:
    t = region.euclidean_radius
    theta = 2.0 * math.pi * np.arange(BOUNDARY_POINTS) / BOUNDARY_POINTS
    edge, edge_stretch = region.mapped(t * np.exp(1j * theta))
    edge_weights = edge_stretch * t * 2.0 * math.pi / BOUNDARY_POINTS

    x, wx = leggauss(RADIAL_POINTS)
    edges = np.linspace(0.0, t, RADIAL_PIECES + 1)
    radii = np.concatenate([0.5 * (b - a) * x + 0.5 * (a + b) for a, b in zip(edges[:-1], edges[1:])])
    radial_w = np.concatenate([0.5 * (b - a) * wx for a, b in zip(edges[:-1], edges[1:])])
    angles = 2.0 * math.pi * np.arange(ANGULAR_POINTS) / ANGULAR_POINTS
    w = (radii[:, None] * np.exp(1j * angles[None, :])).ravel()
    weights = (radial_w[:, None] * radii[:, None] * np.full((1, ANGULAR_POINTS), 2.0 * math.pi / ANGULAR_POINTS)).ravel()
    z, stretch = region.mapped(w)
    return edge, edge_weights, z, weights * stretch ** 2


def _polygon_quadrature(region: PolygonRegion) -> Quadrature:
    p = region.points
    d = np.roll(p, -1) - p
    x, wx = leggauss(EDGE_POINTS)
    s = (np.arange(EDGE_PIECES)[:, None] + 0.5 * (x[None, :] + 1.0)).ravel() / EDGE_PIECES
    ws = np.tile(0.5 * wx, EDGE_PIECES) / EDGE_PIECES
    edge = (p[:, None] + d[:, None] * s[None, :]).ravel()
    edge_weights = (np.abs(d)[:, None] * ws[None, :]).ravel()

    lo_x, hi_x = p.real.min(), p.real.max()
    lo_y, hi_y = p.imag.min(), p.imag.max()
    hx, hy = (hi_x - lo_x) / MASK_POINTS, (hi_y - lo_y) / MASK_POINTS
    gx = lo_x + hx * (np.arange(MASK_POINTS) + 0.5)
    gy = lo_y + hy * (np.arange(MASK_POINTS) + 0.5)
    z = (gx[None, :] + 1j * gy[:, None]).ravel()
    z = z[region.contains(z)]
    return edge, edge_weights, z, np.full(z.shape, hx * hy)


def isoperimetric_check(region: Region, m: MetricField) -> IsoperimetricResult:
    """A_g 4 pi / L_g^2 and the Alexandrov ratio for a disk or a simple polygon"""
    if region.background != m.background:
        raise LabInputError("Region and field live on different backgrounds")
    if isinstance(region, DiskRegion):
        _validate_disk(region, m)
        edge, edge_weights, z, jac = _disk_quadrature(region)
    elif isinstance(region, PolygonRegion):
        _validate_polygon(region, m)
        edge, edge_weights, z, jac = _polygon_quadrature(region)
    else:
        raise LabInputError(f"Unsupported region {type(region).__name__}")

    length = float(np.sum(np.exp(m.log_factor(edge)) * edge_weights))
    lam = m.log_factor(z)
    area = float(np.sum(jac * np.exp(2.0 * lam)))
    domain, _ = m.locate(z)
    K = m.curvature_at_domain_points(domain)
    positive = float(np.nansum(jac * np.exp(2.0 * lam) * np.maximum(K, 0.0)))

    ratio = 4.0 * math.pi * area / length ** 2
    alexandrov = 2.0 * (2.0 * math.pi - positive) * area / length ** 2
    logger.debug(f"Isoperimetric ratio {ratio:.6f} (Alexandrov {alexandrov:.6f}) on {m.label}")
    return IsoperimetricResult(area=area, length=length, positive_mass=positive,
                               ratio=ratio, alexandrov_ratio=alexandrov)

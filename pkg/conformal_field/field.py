# ============================================================================
# conformal_field/field.py - Conformal metrics g = e^{2U} sigma on the octagon
# ============================================================================
# A MetricField stores the smooth part of its exponent on grid nodes. The
# total log factor in disk coordinates is
#     lambda = background + u_smooth + cone_weight * T + (patch override)
# with T the cut-off logarithm around the cone. Curvature is always
# K = -e^{-2 lambda} Delta_e lambda; only the smooth part is ever
# differentiated numerically.

import logging
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Optional, Tuple, Union

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import RectBivariateSpline

from models import Background, LabDomainError, LabInputError, LabRangeError
from surface_atlas.isometry import derivative_batch
from surface_atlas.octagon import CHI, SIDE_CENTER, SIDES, SurfacePoint
from conformal_field.grid import SurfaceGrid
from conformal_field.smoothing import SmoothingPatch

logger = logging.getLogger(__name__)

CONE_INNER = 0.35
CONE_OUTER = 0.55
EXCLUSION_CELLS = 2.0

# quadrature layout
SECTOR_SPLIT = 4
ANGULAR_POINTS = 16
RADIAL_POINTS = 12
OUTER_PIECES = 4
PATCH_PIECES = 64
PATCH_POINTS = 8


# ---- cone data -------------------------------------------------------------

@dataclass(frozen=True)
class ConePrescription:
    point: complex
    beta: float

    def __post_init__(self):
        if not self.beta > 0:
            raise LabInputError(f"Cone order must be positive (angle > 2 pi), got beta = {self.beta}")

    @classmethod
    def from_angle(cls, alpha: float, point: complex = 0j) -> "ConePrescription":
        return cls(point=complex(point), beta=alpha / (2.0 * math.pi) - 1.0)

    @property
    def alpha(self) -> float:
        return 2.0 * math.pi * (self.beta + 1.0)

    def to_dict(self) -> dict:
        return {"point": [self.point.real, self.point.imag], "beta": self.beta}

    @classmethod
    def from_dict(cls, data: dict) -> "ConePrescription":
        return cls(point=complex(*data["point"]), beta=data["beta"])


def cutoff(r, r1: float, r2: float):
    """(eta, eta', eta'') of the quintic step: 1 below r1, 0 above r2"""
    width = r2 - r1
    t = np.clip((r - r1) / width, 0.0, 1.0)
    eta = 1.0 - t ** 3 * (10.0 - 15.0 * t + 6.0 * t ** 2)
    d1 = -30.0 * t ** 2 * (1.0 - t) ** 2 / width
    d2 = -60.0 * t * (1.0 - t) * (1.0 - 2.0 * t) / width ** 2
    return eta, d1, d2


def cone_template(z, radii: Optional[Tuple[float, float]] = (CONE_INNER, CONE_OUTER)):
    """(T, grad T, Laplacian T) for T = eta(r) ln r; Laplacian excludes the point mass at 0"""
    z = np.asarray(z, dtype=complex)
    r = np.maximum(np.abs(z), 1e-150)
    log_r = np.log(r)
    if radii is None:
        return log_r, z / r ** 2, np.zeros(r.shape)
    eta, d1, d2 = cutoff(r, *radii)
    radial = d1 * log_r + eta / r
    lap = d2 * log_r + d1 * (log_r + 2.0) / r
    return eta * log_r, radial * z / r, lap


def background_terms(z, background: Background):
    """(log factor, grad, Euclidean Laplacian) of the background density"""
    z = np.asarray(z, dtype=complex)
    if background == Background.FLAT:
        zero = np.zeros(z.shape)
        return zero, zero.astype(complex), zero
    one_minus = 1.0 - np.abs(z) ** 2
    return np.log(2.0 / one_minus), 2.0 * z / one_minus, 4.0 / one_minus ** 2


# ---- the field -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MetricField:
    grid: SurfaceGrid
    u: np.ndarray                                   # smooth exponent on every grid node
    cone: Optional[ConePrescription] = None
    cone_weight: float = 0.0                        # coefficient of T actually used
    cutoff_radii: Optional[Tuple[float, float]] = (CONE_INNER, CONE_OUTER)
    patch: Optional[SmoothingPatch] = None
    label: str = "field"
    history: Tuple[float, ...] = field(default=(), repr=False)

    def __post_init__(self):
        if self.u.shape != self.grid.shape:
            raise LabInputError(f"u has shape {self.u.shape}, grid is {self.grid.shape}")
        if not np.all(np.isfinite(self.u)):
            raise LabInputError("Conformal exponent contains NaN or inf")
        if self.cone is not None and abs(self.cone.point) > 1e-12:
            raise LabDomainError("Cone points are supported at the octagon centre only")
        if self.patch is not None and self.cone is None:
            raise LabInputError("A smoothing patch needs the cone it smooths")

    @property
    def background(self) -> Background:
        return self.grid.background

    @property
    def has_singularity(self) -> bool:
        return self.cone is not None and self.patch is None

    @property
    def exclusion_radius(self) -> float:
        return EXCLUSION_CELLS * self.grid.h if self.has_singularity else 0.0

    def with_exponent(self, u: np.ndarray, **changes) -> "MetricField":
        return replace(self, u=u, **changes)

    # ---- interpolants ------------------------------------------------------

    @cached_property
    def _u_spline(self) -> RectBivariateSpline:
        return RectBivariateSpline(self.grid.coords, self.grid.coords, self.u, kx=3, ky=3, s=0)

    @cached_property
    def lap_sigma_nodes(self) -> np.ndarray:
        """Background-invariant Laplacian of the smooth part, ghost-filled"""
        grid = self.grid
        lap = grid.laplacian_full(self.u) / grid.sigma_density
        if grid.is_surface:
            return grid.extend(lap[grid.mask])
        return np.where(grid.mask, lap, 0.0)[grid.fill_index]

    @cached_property
    def _lap_spline(self) -> RectBivariateSpline:
        return RectBivariateSpline(self.grid.coords, self.grid.coords, self.lap_sigma_nodes, kx=3, ky=3, s=0)

    # ---- evaluation at domain points ----------------------------------------

    def sample(self, w):
        """(lambda, grad lambda, Delta_e lambda) at domain (canonical) points"""
        w = np.asarray(w, dtype=complex)
        x, y = w.real, w.imag
        us = self._u_spline.ev(x, y)
        grad_us = self._u_spline.ev(x, y, dx=1) + 1j * self._u_spline.ev(x, y, dy=1)
        bg, grad_bg, lap_bg = background_terms(w, self.background)
        density = np.exp(2.0 * bg) if self.grid.is_surface else 1.0
        lap_us = self._lap_spline.ev(x, y) * density
        lam = bg + us
        grad = grad_bg + grad_us
        lap = lap_bg + lap_us
        if self.cone is not None:
            T, grad_T, lap_T = cone_template(w, self.cutoff_radii)
            lam = lam + self.cone_weight * T
            grad = grad + self.cone_weight * grad_T
            lap = lap + self.cone_weight * lap_T
        if self.patch is not None:
            lam, grad, lap = self._apply_patch(w, bg + us, grad_bg + grad_us, lap_bg + lap_us, lam, grad, lap)
        return lam, grad, lap

    def _apply_patch(self, w, smooth, grad_smooth, lap_smooth, lam, grad, lap):
        patch = self.patch
        inside = np.abs(w) < patch.extent
        if not np.any(inside):
            return lam, grad, lap
        lam, grad, lap = np.array(lam, dtype=float), np.array(grad, dtype=complex), np.array(lap, dtype=float)
        rho0 = patch.rho0
        a0 = smooth[inside] + (self.cone_weight + 1.0) * math.log(rho0)
        u_k, grad_k, lap_k = patch.evaluate(w[inside] / rho0, a0, rho0 * grad_smooth[inside],
                                            rho0 ** 2 * lap_smooth[inside])
        lam[inside] = u_k - math.log(rho0)
        grad[inside] = grad_k / rho0
        lap[inside] = lap_k / rho0 ** 2
        return lam, grad, lap

    def chart_exponent(self, w):
        """Exponent in the smoothing chart zeta = w / rho0 (u_k of the family)"""
        if self.cone is None:
            raise LabInputError("Chart exponent is defined around a cone only")
        rho0 = self.patch.rho0 if self.patch is not None else 1.0
        lam, _, _ = self.sample(w)
        return lam + math.log(rho0)

    # ---- evaluation anywhere in the disk -----------------------------------

    def locate(self, z):
        """(domain points w, deck derivative h'(z)) with w = h(z)"""
        z = np.asarray(z, dtype=complex)
        if not self.grid.is_surface:
            if np.any(np.abs(z) >= self.grid.extent):
                raise LabRangeError("Point outside the chart disk")
            return z, np.ones(z.shape, dtype=complex)
        flat = z.reshape(-1)
        w, a, b = self.grid.atlas.canonicalize_batch(flat)
        return w.reshape(z.shape), derivative_batch(a, b, flat).reshape(z.shape)

    def in_exclusion(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=complex)
        if not self.has_singularity:
            return np.zeros(w.shape, dtype=bool)
        return np.abs(w - self.cone.point) < self.exclusion_radius

    def conformal_exponent(self, z):
        """U with g = e^{2U} times the background metric (deck invariant)"""
        w, _ = self.locate(z)
        lam, _, _ = self.sample(w)
        bg, _, _ = background_terms(w, self.background)
        return lam - bg

    def log_factor(self, z):
        """lambda(z) with g = e^{2 lambda}|dz|^2 at z itself"""
        z = np.asarray(z, dtype=complex)
        w, _ = self.locate(z)
        lam, _, _ = self.sample(w)
        bg_w, _, _ = background_terms(w, self.background)
        bg_z, _, _ = background_terms(z, self.background)
        return bg_z + lam - bg_w

    def geometry(self, z):
        """(lambda, grad lambda, K, domain point) at arbitrary disk points.

        U is deck invariant, so grad U pulls back by conj(h'); the background
        part is evaluated at z itself.
        """
        z = np.asarray(z, dtype=complex)
        w, deriv = self.locate(z)
        lam, grad, lap = self.sample(w)
        bg_w, gbg_w, _ = background_terms(w, self.background)
        bg_z, gbg_z, _ = background_terms(z, self.background)
        K = -np.exp(-2.0 * lam) * lap
        return bg_z + lam - bg_w, gbg_z + np.conj(deriv) * (grad - gbg_w), K, w

    def log_factor_and_gradient(self, z):
        lam, grad, _, _ = self.geometry(z)
        return lam, grad

    def curvature(self, z):
        w, _ = self.locate(z)
        if np.any(self.in_exclusion(w)):
            raise LabDomainError("Curvature requested inside the cone-exclusion zone")
        lam, _, lap = self.sample(w)
        return -np.exp(-2.0 * lam) * lap

    def curvature_at_domain_points(self, w):
        """K at canonical points; NaN inside the exclusion zone"""
        lam, _, lap = self.sample(w)
        K = -np.exp(-2.0 * lam) * lap
        return np.where(self.in_exclusion(w), np.nan, K)

    # ---- integration -------------------------------------------------------

    @cached_property
    def quadrature(self) -> Tuple[np.ndarray, np.ndarray]:
        breaks = [CONE_INNER, CONE_OUTER]
        patch_extent = self.patch.extent if self.patch is not None else None
        if self.grid.is_surface:
            return octagon_quadrature(breaks, patch_extent)
        return disk_quadrature(self.grid.extent * (1.0 - 1e-9), breaks, patch_extent)

    def area(self) -> float:
        points, weights = self.quadrature
        lam, _, _ = self.sample(points)
        return float(np.sum(weights * np.exp(2.0 * lam)))

    def curvature_masses(self) -> Tuple[float, float]:
        """(positive mass, negative mass) of K dA_g = -Delta_e lambda dx dy (smooth part)"""
        points, weights = self.quadrature
        _, _, lap = self.sample(points)
        density = -lap
        return float(np.sum(weights * np.maximum(density, 0.0))), float(np.sum(weights * np.minimum(density, 0.0)))

    @property
    def cone_atom(self) -> float:
        """Curvature concentrated at an unsmoothed cone: 2 pi (1 - alpha / 2 pi)"""
        return -2.0 * math.pi * self.cone_weight if self.has_singularity else 0.0


# ---- quadratures -----------------------------------------------------------

def _radial_breaks(limit: float, breaks, patch_extent: Optional[float], outer_pieces: int):
    edges = [0.0]
    if patch_extent is not None:
        edges.extend(patch_extent * np.geomspace(1e-4, 1.0, PATCH_PIECES + 1))
    start = edges[-1]
    for b in breaks:
        if start < b < limit:
            edges.append(b)
            start = b
    tail = np.linspace(start, limit, outer_pieces + 1)[1:]
    edges.extend(tail)
    return np.array(edges)


def _polar_nodes(theta_nodes, theta_weights, radius_of, breaks, patch_extent, outer_pieces):
    x_r, w_r = leggauss(RADIAL_POINTS)
    x_p, w_p = leggauss(PATCH_POINTS)
    points, weights = [], []
    for theta, wt in zip(theta_nodes, theta_weights):
        edges = _radial_breaks(radius_of(theta), breaks, patch_extent, outer_pieces)
        for j, (lo, hi) in enumerate(zip(edges[:-1], edges[1:])):
            in_patch = patch_extent is not None and hi <= patch_extent * (1.0 + 1e-12)
            xs, ws = (x_p, w_p) if in_patch else (x_r, w_r)
            r = 0.5 * (hi - lo) * xs + 0.5 * (hi + lo)
            points.append(r * np.exp(1j * theta))
            weights.append(0.5 * (hi - lo) * ws * r * wt)
    return np.concatenate(points), np.concatenate(weights)


def octagon_boundary_radius(theta: float) -> float:
    """Euclidean radius of the octagon boundary in direction theta"""
    k = int(np.floor((theta + math.pi / 8) / (math.pi / 4))) % SIDES
    phi = theta - k * math.pi / 4
    c = SIDE_CENTER * math.cos(phi)
    return c - math.sqrt(c * c - 1.0)


def octagon_quadrature(breaks, patch_extent: Optional[float] = None):
    """Polar Gauss-Legendre rule over the octagon with its exact circular sides"""
    x_t, w_t = leggauss(ANGULAR_POINTS)
    thetas, theta_w = [], []
    piece = (math.pi / 4) / SECTOR_SPLIT
    for k in range(SIDES * SECTOR_SPLIT):
        lo = -math.pi / 8 + k * piece
        thetas.append(lo + 0.5 * piece * (x_t + 1.0))
        theta_w.append(0.5 * piece * w_t)
    return _polar_nodes(np.concatenate(thetas), np.concatenate(theta_w), octagon_boundary_radius,
                        breaks, patch_extent, OUTER_PIECES)


def disk_quadrature(radius: float, breaks, patch_extent: Optional[float] = None):
    n = SIDES * SECTOR_SPLIT * ANGULAR_POINTS
    thetas = 2.0 * math.pi * np.arange(n) / n
    weights = np.full(n, 2.0 * math.pi / n)
    return _polar_nodes(thetas, weights, lambda _: radius, breaks, patch_extent, OUTER_PIECES)


# ---- curvature -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CurvatureField:
    values: np.ndarray          # K on grid nodes, NaN outside the mask or in the exclusion zone
    positive_mass: float
    negative_mass: float
    cone_atom: float = 0.0

    @property
    def total_mass(self) -> float:
        return self.positive_mass + self.negative_mass + self.cone_atom

    @property
    def minimum(self) -> float:
        return float(np.nanmin(self.values))

    @property
    def maximum(self) -> float:
        return float(np.nanmax(self.values))


def gaussian_curvature(m: MetricField) -> CurvatureField:
    if not np.all(np.isfinite(m.u)):
        raise LabInputError("Conformal exponent contains NaN or inf")
    grid = m.grid
    values = np.full(grid.shape, np.nan)
    values[grid.mask] = m.curvature_at_domain_points(grid.z[grid.mask])
    positive, negative = m.curvature_masses()
    return CurvatureField(values=values, positive_mass=positive, negative_mass=negative, cone_atom=m.cone_atom)


def gauss_bonnet_defect(m: MetricField) -> float:
    """Integral of K dA_g (cone atom included) minus 2 pi chi"""
    if not m.grid.is_surface:
        raise LabInputError("Gauss-Bonnet applies to surface fields, not chart fields")
    positive, negative = m.curvature_masses()
    defect = positive + negative + m.cone_atom - 2.0 * math.pi * CHI
    logger.debug(f"GB defect of {m.label}: {defect:.3e}")
    return defect


def total_area(m: MetricField) -> float:
    return m.area()


def normalize_area(m: MetricField, A: float) -> MetricField:
    """Shift the exponent by a constant so the g-area equals A"""
    if not A > 0:
        raise LabInputError("Target area must be positive")
    c = 0.5 * math.log(A / m.area())
    patch = m.patch.shifted(c) if m.patch is not None else None
    return m.with_exponent(m.u + c, patch=patch)


# ---- Laplace-Beltrami ------------------------------------------------------

def _stencil(values: np.ndarray, i: int, j: int, h: float) -> float:
    return (values[i + 1, j] + values[i - 1, j] + values[i, j + 1] + values[i, j - 1]
            - 4.0 * values[i, j]) / h ** 2


def laplacian_sigma(f: Union[MetricField, np.ndarray], at, grid: Optional[SurfaceGrid] = None) -> float:
    """Five-point Laplace-Beltrami value of a nodal scalar at a point, bilinear between nodes"""
    cone_field = None
    if isinstance(f, MetricField):
        cone_field = f
        grid = f.grid
        values = f.u
    else:
        if grid is None:
            raise LabInputError("A nodal array needs its grid")
        values = np.asarray(f, dtype=float)
    if values.shape != grid.shape:
        raise LabInputError("Scalar grid does not match the grid shape")
    z = at.z if isinstance(at, SurfacePoint) else complex(at)
    if cone_field is not None and cone_field.has_singularity and abs(z) < cone_field.exclusion_radius:
        raise LabDomainError(f"Point {z} lies in the cone-exclusion zone")
    m = (len(grid.coords) - 1) // 2
    fx, fy = z.real / grid.h + m, z.imag / grid.h + m
    i0, j0 = int(math.floor(fx)), int(math.floor(fy))
    evaluable = grid.mask | grid.ghost
    if i0 < 2 or j0 < 2 or i0 + 3 >= grid.shape[0] or j0 + 3 >= grid.shape[1] \
            or not np.all(evaluable[i0 - 1:i0 + 3, j0 - 1:j0 + 3]) or not grid.mask[grid.node_of(z)]:
        raise LabInputError(f"Point {z} is within two cells of the evaluable boundary")
    tx, ty = fx - i0, fy - j0
    total = 0.0
    for di, dj, wgt in ((0, 0, (1 - tx) * (1 - ty)), (1, 0, tx * (1 - ty)), (0, 1, (1 - tx) * ty), (1, 1, tx * ty)):
        if wgt == 0.0:
            continue
        i, j = i0 + di, j0 + dj
        total += wgt * _stencil(values, i, j, grid.h) / grid.sigma_density[i, j]
    return float(total)

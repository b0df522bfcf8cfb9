# ============================================================================
# conformal_field/families.py - Generated metric corpus
# ============================================================================
# hyperbolic (homotheties), random bump fields, flat / eps-curved cones,
# the smoothing family g_k on the surface, and the model cone chart.

import logging
import math
from typing import Callable, List, Optional, Sequence

import numpy as np

import config
from models import LabInputError, TableRow
from surface_atlas.isometry import disk_distance
from surface_atlas.octagon import CHI, INRADIUS, FundamentalOctagon
from surface_atlas.classes import neighbor_tiles
from conformal_field.cone import solve_cone_metric_curvature, solve_flat_cone_metric
from conformal_field.field import ConePrescription, MetricField, normalize_area
from conformal_field.grid import SurfaceGrid, cached_chart_grid, cached_surface_grid
from conformal_field.smoothing import SmoothingPatch

logger = logging.getLogger(__name__)

SURFACE_CHART_SCALE = 0.3       # smoothing chart zeta = z / 0.3 on the surface
BUMP_RADIUS = 0.8
MIN_A0_SAMPLES = (48, 96)


def field_from_function(grid: SurfaceGrid, fn: Callable[[np.ndarray], np.ndarray], label: str,
                        **kwargs) -> MetricField:
    """Sample a deck-invariant exponent (given on domain points) on every grid node"""
    defined = grid.mask | grid.ghost
    z = grid.z[defined]
    if grid.is_surface:
        z, _, _ = grid.atlas.canonicalize_batch(z)
    values = np.zeros(grid.shape)
    values[defined] = fn(z)
    return MetricField(grid=grid, u=values[grid.fill_index], label=label, **kwargs)


def hyperbolic_field(atlas: FundamentalOctagon, cells: Optional[int] = None, c: float = 0.0) -> MetricField:
    """u = c: the homothety e^{2c} sigma"""
    grid = cached_surface_grid(atlas, cells or config.GRID_CELLS)
    label = "hyperbolic" if c == 0 else f"homothety {c:+.6g}"
    return MetricField(grid=grid, u=np.full(grid.shape, float(c)), label=label)


def _bump_profile(d, radius: float):
    t = np.clip(d / radius, 0.0, 1.0 - 1e-12)
    return np.where(d < radius, np.exp(1.0 - 1.0 / (1.0 - t ** 2)), 0.0)


def bump_exponent(centers: Sequence[complex], heights: Sequence[float], atlas: FundamentalOctagon,
                  radius: float = BUMP_RADIUS) -> Callable[[np.ndarray], np.ndarray]:
    """Deck-invariant sum of compact bumps; images over the 49 neighbour tiles suffice"""
    if not 0 < radius <= 1.0:
        raise LabInputError("Bump radius must lie in (0, 1]")
    tiles = neighbor_tiles(atlas)
    images = [(h.apply(complex(c)), float(a)) for h in tiles for c, a in zip(centers, heights)]

    def fn(w):
        w = np.asarray(w, dtype=complex)
        total = np.zeros(w.shape)
        for center, height in images:
            total += height * _bump_profile(disk_distance(w, center), radius)
        return total

    return fn


def random_bump_field(atlas: FundamentalOctagon, seed: int, cells: Optional[int] = None,
                      n_bumps: int = 3, amplitude: float = 0.3, radius: float = BUMP_RADIUS) -> MetricField:
    """Random smooth field: bumps with heights in [-amplitude, amplitude] centred in the octagon"""
    rng = np.random.default_rng(seed)
    centers = []
    while len(centers) < n_bumps:
        # centres inside the inscribed sigma-disk
        d = INRADIUS * math.sqrt(rng.uniform())
        centers.append(math.tanh(d / 2.0) * np.exp(2j * math.pi * rng.uniform()))
    heights = rng.uniform(-amplitude, amplitude, size=n_bumps)
    grid = cached_surface_grid(atlas, cells or config.GRID_CELLS)
    fn = bump_exponent(centers, heights, atlas, radius)
    return field_from_function(grid, fn, label=f"bumps seed={seed}")


def single_bump_field(atlas: FundamentalOctagon, height: float, center: complex = 0j,
                      cells: Optional[int] = None, radius: float = BUMP_RADIUS) -> MetricField:
    grid = cached_surface_grid(atlas, cells or config.GRID_CELLS)
    return field_from_function(grid, bump_exponent([center], [height], atlas, radius),
                               label=f"bump {height:+.4g}")


def flat_cone_field(atlas: FundamentalOctagon, cells: Optional[int] = None,
                    A: float = 4.0 * math.pi) -> MetricField:
    return solve_flat_cone_metric(ConePrescription(0j, float(-CHI)), atlas, cells=cells, A=A)


def eps_curved_field(atlas: FundamentalOctagon, eps: float, cells: Optional[int] = None,
                     A: float = 4.0 * math.pi) -> MetricField:
    return solve_cone_metric_curvature(ConePrescription(0j, float(-CHI)), atlas, eps, cells=cells, A=A)


# ---- smoothing family -------------------------------------------------------

def chart_min_a0(m: MetricField, rho0: float) -> float:
    """min over the chart disk |zeta| <= 1 of a0 = background + u + (beta + 1) ln rho0"""
    n_r, n_t = MIN_A0_SAMPLES
    r = rho0 * np.linspace(0.0, 1.0, n_r + 1)
    theta = 2.0 * math.pi * np.arange(n_t) / n_t
    w = (r[:, None] * np.exp(1j * theta[None, :])).ravel()
    smooth = m.with_exponent(m.u, cone=None, cone_weight=0.0, patch=None)
    lam, _, _ = smooth.sample(w)
    return float(np.min(lam)) + (m.cone_weight + 1.0) * math.log(rho0)


def smoothing_family(m: MetricField, c: ConePrescription, k: int, rho0: Optional[float] = None) -> MetricField:
    """g_k: the cone of m replaced by a hyperbolic cap inside the chart radius ~ 1/k"""
    if m.cone is None or m.patch is not None:
        raise LabInputError("smoothing_family needs an unsmoothed cone metric")
    if abs(c.point - m.cone.point) > 1e-12:
        raise LabInputError("Cone prescription does not match the field's cone")
    if rho0 is None:
        rho0 = SURFACE_CHART_SCALE if m.grid.is_surface else 1.0
    beta = m.cone_weight
    patch = SmoothingPatch.build(k, beta, chart_min_a0(m, rho0), rho0)
    if m.cutoff_radii is not None and patch.extent >= m.cutoff_radii[0]:
        raise LabInputError("Smoothing chart reaches the cut-off of the cone template")
    if m.grid.is_surface and patch.rho0 > INRADIUS:
        raise LabInputError("Smoothing chart leaves the octagon")
    logger.info(f"✅ Smoothing patch k={k}: C_k = {patch.C_k:.6f}, chart radius {patch.radius:.4f}")
    return m.with_exponent(m.u, patch=patch, label=f"smoothing k={k}")


def smoothing_corpus(atlas: FundamentalOctagon, ks: Sequence[int], cells: Optional[int] = None,
                     A: float = 4.0 * math.pi) -> List[MetricField]:
    """g_k for each k, normalised to area A"""
    flat = flat_cone_field(atlas, cells=cells, A=A)
    return [normalize_area(smoothing_family(flat, flat.cone, k), A) for k in ks]


def smoothing_profile(m: MetricField, ks: Sequence[int], rays: int = 16, radii: int = 64) -> List[TableRow]:
    """
    Per k: C_k, u_k(0), the chart minimum of the closed-form Laplacian of u_k
    and the largest increase of u_k over the previous k on radial rays.

    The Laplacian is taken in the chart zeta and only where the cap or the
    blend is active; the increase is measured on the whole chart disk.
    """
    ks = sorted(set(int(k) for k in ks))
    if not ks:
        raise LabInputError("smoothing_profile needs at least one k")
    rho0 = SURFACE_CHART_SCALE if m.grid.is_surface else 1.0
    r = rho0 * np.linspace(0.0, 0.98, radii)
    theta = 2.0 * math.pi * np.arange(rays) / rays
    w = (r[:, None] * np.exp(1j * theta[None, :])).ravel()
    rows, previous = [], None
    for k in ks:
        g = smoothing_family(m, m.cone, k)
        u_k = g.chart_exponent(w)
        _, _, lap = g.sample(w)
        inside = np.abs(w) < g.patch.extent
        increase = None if previous is None else float(np.max(u_k - previous))
        rows.append(TableRow(key=f"k={k}", values={
            "k": k,
            "C_k": g.patch.C_k,
            "u_k(0)": float(u_k[0]),
            "min_laplacian": float(np.min(lap[inside])) * rho0 ** 2,
            "max_increase": increase,
        }))
        previous = u_k
    return rows


# ---- flat model chart -------------------------------------------------------

def model_chart_field(beta: float = 2.0, cells: int = 200) -> MetricField:
    """(beta + 1)^2 r^{2 beta}|dz|^2 on the unit disk, i.e. u0 = ln(beta + 1) + beta ln r"""
    grid = cached_chart_grid(cells)
    return MetricField(grid=grid, u=np.full(grid.shape, math.log(beta + 1.0)),
                       cone=ConePrescription(0j, beta), cone_weight=beta, cutoff_radii=None,
                       label=f"model cone beta={beta:g}")


def constant_chart_field(c: float = 0.0, cells: int = 200) -> MetricField:
    grid = cached_chart_grid(cells)
    return MetricField(grid=grid, u=np.full(grid.shape, float(c)), label=f"chart {c:+.4g}")

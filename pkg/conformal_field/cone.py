# ============================================================================
# conformal_field/cone.py - Flat and constant-curvature cone metrics
# ============================================================================
# Both solves split U = w + beta T around the cone at the octagon centre:
#   flat:        Delta_e w = -rho - beta Delta_e T          (K = 0 off the cone)
#   eps-curved:  Delta_e w = -rho - beta Delta_e T + eps rho e^{2U}
# with rho the sigma density. The flat problem is singular; the compatible
# cone weight comes out of a bordered solve (two right-hand sides).

import logging
import math
from typing import Optional

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import spsolve, splu

import config
from models import LabDomainError, LabInputError, NumericConvergenceError
from surface_atlas.octagon import CHI, FundamentalOctagon
from conformal_field.field import ConePrescription, MetricField, cone_template, normalize_area
from conformal_field.grid import SurfaceGrid, cached_surface_grid

logger = logging.getLogger(__name__)

SOLVE_TOLERANCE = 1e-10
EPS_LIMIT = 0.1
NEWTON_MAX_STEPS = 40
LINE_SEARCH_HALVINGS = 30


def _check_prescription(c: ConePrescription):
    if abs(c.point) > 1e-12:
        raise LabDomainError("Cone solves support a cone at the octagon centre only")
    if abs(c.beta + CHI) > 1e-9:
        raise LabInputError(f"A flat metric needs beta = -chi = {-CHI}, got {c.beta}")


def _surface_grid(atlas: FundamentalOctagon, cells: Optional[int]) -> SurfaceGrid:
    return cached_surface_grid(atlas, cells or config.GRID_CELLS)


def _nodal_terms(grid: SurfaceGrid):
    z = grid.z[grid.mask]
    rho = grid.sigma_density[grid.mask]
    T, _, lap_T = cone_template(z)
    return z, rho, T, lap_T


def solve_flat_cone_metric(c: ConePrescription, atlas: FundamentalOctagon,
                           cells: Optional[int] = None, A: Optional[float] = None) -> MetricField:
    """Flat metric with one cone of order beta = -chi at the centre; mean-zero gauge unless A given"""
    _check_prescription(c)
    grid = _surface_grid(atlas, cells)
    n = grid.size
    L = grid.laplacian_operator
    _, rho, _, lap_T = _nodal_terms(grid)
    gauge = rho * grid.h ** 2
    bordered = sparse.bmat([
        [L, sparse.csr_matrix(np.ones((n, 1)))],
        [sparse.csr_matrix(gauge[None, :]), None],
    ]).tocsc()
    rhs = np.zeros((n + 1, 2))
    rhs[:n, 0] = -rho
    rhs[:n, 1] = -lap_T
    try:
        solution = splu(bordered).solve(rhs)
    except RuntimeError as e:
        logger.error(f"❌ Bordered factorisation failed: {e}")
        raise NumericConvergenceError(f"Flat cone factorisation failed: {e}")
    mu_rho, mu_cone = solution[n, 0], solution[n, 1]
    if abs(mu_cone) < 1e-14:
        raise NumericConvergenceError("Cone template does not balance the area term", residual=float("inf"))
    beta_h = -mu_rho / mu_cone
    w = solution[:n, 0] + beta_h * solution[:n, 1]
    residual = float(np.linalg.norm(L @ w + rho + beta_h * lap_T) / np.linalg.norm(rho))
    if residual > SOLVE_TOLERANCE:
        logger.error(f"❌ Flat cone residual {residual:.3e} above tolerance")
        raise NumericConvergenceError("Flat cone solve did not reach tolerance", residual=residual, best=w)
    logger.info(f"✅ Flat cone metric: discrete beta = {beta_h:.6f} (prescribed {c.beta}), residual {residual:.2e}")
    m = MetricField(grid=grid, u=grid.extend(w), cone=c, cone_weight=beta_h, label="flat-cone",
                    history=(residual,))
    return normalize_area(m, A) if A is not None else m


def solve_cone_metric_curvature(c: ConePrescription, atlas: FundamentalOctagon, eps: float,
                                cells: Optional[int] = None, A: float = 4.0 * math.pi) -> MetricField:
    """Metric of constant curvature -eps off the cone, area A; damped Newton from the flat solution.

    The cone order shrinks to beta_eps = beta - eps A / (2 pi) so that
    Gauss-Bonnet balances at the prescribed area.
    """
    if eps < 0:
        raise LabInputError("eps must be non-negative")
    if eps >= EPS_LIMIT:
        raise LabInputError(f"eps must stay below {EPS_LIMIT}")
    flat = solve_flat_cone_metric(c, atlas, cells=cells, A=A)
    if eps == 0:
        return flat
    grid = flat.grid
    L = grid.laplacian_operator
    _, rho, T, lap_T = _nodal_terms(grid)
    beta = flat.cone_weight - eps * A / (2.0 * math.pi)
    if beta <= 0:
        raise LabInputError(f"eps = {eps} leaves no cone (beta_eps = {beta:.4f})")
    cone_power = np.exp(2.0 * beta * T)
    scale = float(np.linalg.norm(rho))

    def residual_of(w):
        return L @ w + beta * lap_T + rho - eps * rho * np.exp(2.0 * w) * cone_power

    w = flat.u[grid.mask].copy()
    w += 0.5 * math.log(A / float(np.sum(grid.h ** 2 * rho * np.exp(2.0 * w) * cone_power)))
    F = residual_of(w)
    history = [float(np.linalg.norm(F)) / scale]
    for step in range(NEWTON_MAX_STEPS):
        if history[-1] < SOLVE_TOLERANCE:
            break
        J = (L - sparse.diags(2.0 * eps * rho * np.exp(2.0 * w) * cone_power)).tocsc()
        delta = spsolve(J, -F)
        t = 1.0
        for _ in range(LINE_SEARCH_HALVINGS):
            trial = w + t * delta
            F_trial = residual_of(trial)
            r_trial = float(np.linalg.norm(F_trial)) / scale
            if r_trial < history[-1]:
                w, F = trial, F_trial
                history.append(r_trial)
                break
            t *= 0.5
        else:
            logger.error(f"❌ Newton line search stalled at residual {history[-1]:.3e}")
            raise NumericConvergenceError("Newton line search stalled", residual=history[-1], best=w)
        logger.debug(f"Newton step {step + 1}: residual {history[-1]:.3e} (t = {t})")
    else:
        raise NumericConvergenceError(f"Newton did not converge in {NEWTON_MAX_STEPS} steps",
                                      residual=history[-1], best=w)
    logger.info(f"✅ eps-curved cone metric: eps={eps}, beta_eps={beta:.6f}, {len(history) - 1} Newton steps")
    return MetricField(grid=grid, u=grid.extend(w), cone=c, cone_weight=beta,
                       label=f"eps-curved {eps:g}", history=tuple(history))

# ============================================================================
# conformal_modulus/solver.py - Dirichlet moduli and the flat formula
# ============================================================================
# h = 0 / 1 on the two boundary components, five-point harmonic inside;
# Mod = 1 / E(h). The energy is summed over grid edges, each edge weighted
# by the fraction of it that lies between the two level sets.
# ============================================================================

import logging
from typing import Optional, Tuple

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as sparse_linalg

from models import LabInputError, ModulusEstimate, ModulusMethod, NumericConvergenceError
from surface_atlas.octagon import FundamentalOctagon
from conformal_field.field import MetricField
from conformal_modulus.annulus import AnnulusRegion

logger = logging.getLogger(__name__)

CG_TOLERANCE = 1e-12
RESIDUAL_LIMIT = 1e-8


def _edge_fraction(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Share of the segment between level values a and b lying in [0, 1] (linear level)"""
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    span = hi - lo
    covered = np.clip(np.minimum(hi, 1.0) - np.maximum(lo, 0.0), 0.0, None)
    flat = span < 1e-300
    inside = (lo > 0.0) & (lo < 1.0)
    return np.where(flat, inside.astype(float), covered / np.where(flat, 1.0, span))


def _edges(shape, periodic: bool):
    """Index pairs of horizontal and vertical grid edges"""
    nx, ny = shape
    idx = np.arange(nx * ny).reshape(shape)
    pairs = [(idx[:, :-1].ravel(), idx[:, 1:].ravel())]
    if periodic:
        pairs.append((idx.ravel(), np.roll(idx, -1, axis=0).ravel()))
    else:
        pairs.append((idx[:-1, :].ravel(), idx[1:, :].ravel()))
    return np.concatenate([p[0] for p in pairs]), np.concatenate([p[1] for p in pairs])


def _rectangular_solve(a: AnnulusRegion) -> Tuple[np.ndarray, float]:
    """Harmonic h on a chart or cylinder grid by Jacobi-preconditioned CG"""
    level = a.level
    region = a.region.ravel()
    values = level.ravel().copy()
    i, j = _edges(level.shape, a.periodic)
    unknown = -np.ones(values.size, dtype=np.int64)
    unknown[region] = np.arange(int(region.sum()))
    n = int(region.sum())

    rows, cols, data = [], [], []
    rhs = np.zeros(n)
    degree = np.zeros(n)
    for p, q in ((i, j), (j, i)):
        sel = region[p]
        p, q = p[sel], q[sel]
        degree += np.bincount(unknown[p], minlength=n)
        both = region[q]
        rows.append(unknown[p[both]])
        cols.append(unknown[q[both]])
        data.append(-np.ones(int(both.sum())))
        np.add.at(rhs, unknown[p[~both]], values[q[~both]])
    A = sparse.csr_matrix((np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))
    A = A + sparse.diags(degree)
    jacobi = sparse_linalg.LinearOperator((n, n), matvec=lambda x: x / degree)
    x0 = values[region]
    solution, info = sparse_linalg.cg(A, rhs, x0=x0, rtol=CG_TOLERANCE, atol=0.0, maxiter=20 * n, M=jacobi)
    residual = float(np.linalg.norm(A @ solution - rhs) / max(np.linalg.norm(rhs), 1e-300))
    if info != 0 or residual > RESIDUAL_LIMIT:
        logger.error(f"❌ CG failed on {a.label}: info={info}, residual={residual:.2e}")
        raise NumericConvergenceError(f"Dirichlet solve failed on {a.label}", residual=residual, best=solution)
    values[region] = solution
    return values.reshape(level.shape), residual


def _surface_solve(a: AnnulusRegion, m: Optional[MetricField]) -> Tuple[np.ndarray, float]:
    """Harmonic h on the ghost-closed octagon grid (nonsymmetric; sparse LU)"""
    grid = a.grid
    L = grid.laplacian_operator
    if m is not None:
        # Laplace-Beltrami rows: e^{-2 lambda} Delta_e
        lam, _, _ = m.sample(grid.z[grid.mask])
        L = sparse.diags(np.exp(-2.0 * lam)) @ L
    level = a.level[grid.mask]
    region = (level > 0.0) & (level < 1.0)
    known = ~region
    L = sparse.csr_matrix(L)
    A = L[region][:, region].tocsc()
    rhs = -(L[region][:, known] @ level[known])
    solution = sparse_linalg.splu(A).solve(rhs)
    residual = float(np.linalg.norm(A @ solution - rhs) / max(np.linalg.norm(rhs), 1e-300))
    if not np.all(np.isfinite(solution)) or residual > RESIDUAL_LIMIT:
        raise NumericConvergenceError(f"Dirichlet solve failed on {a.label}", residual=residual, best=solution)
    interior = level.copy()
    interior[region] = solution
    full = grid.extend(interior)
    # outside the band the extended level keeps the boundary data consistent across sides
    exterior = (grid.mask | grid.ghost) & ~((a.level > 0) & (a.level < 1))
    full[exterior] = a.level[exterior]
    return full, residual


def _energy(a: AnnulusRegion, h: np.ndarray, m: Optional[MetricField]) -> float:
    i, j = _edges(h.shape, a.periodic)
    lv, hv = a.level.ravel(), h.ravel()
    weight = _edge_fraction(lv[i], lv[j])
    if a.grid is not None:
        grid = a.grid
        mask = grid.mask.ravel()
        ghost = grid.ghost.ravel()
        # an edge with one end across a side is shared with its image there
        weight = weight * np.where(mask[i] & mask[j], 1.0, np.where((mask[i] & ghost[j]) | (ghost[i] & mask[j]), 0.5, 0.0))
    terms = weight * (hv[i] - hv[j]) ** 2
    if m is not None:
        # |grad h|_g^2 dA_g: inverse metric averaged over the end nodes, area element at the midpoint
        z = a.grid.z.ravel()
        used = weight > 0
        inverse = np.ones(terms.shape)
        area = np.ones(terms.shape)
        inverse[used] = 0.5 * (np.exp(-2.0 * m.log_factor(z[i][used])) + np.exp(-2.0 * m.log_factor(z[j][used])))
        area[used] = np.exp(2.0 * m.log_factor(0.5 * (z[i][used] + z[j][used])))
        terms = terms * inverse * area
    return float(np.sum(terms))


def modulus_dirichlet(a: AnnulusRegion, atlas: Optional[FundamentalOctagon] = None,
                      m: Optional[MetricField] = None) -> ModulusEstimate:
    """Mod = 1 / Dirichlet energy of the harmonic measure of one boundary component"""
    a.validate()
    if a.kind == "surface":
        if atlas is not None and a.grid.atlas != atlas:
            raise LabInputError("Annulus was built on a different atlas")
        if m is not None and m.grid is not a.grid:
            raise LabInputError("Metric and annulus use different grids")
        h, residual = _surface_solve(a, m)
    else:
        if m is not None:
            raise LabInputError("Metric weighting applies to surface annuli only")
        h, residual = _rectangular_solve(a)
    energy = _energy(a, h, m)
    if not energy > 0:
        raise NumericConvergenceError(f"Zero Dirichlet energy on {a.label}", residual=residual)
    value = 1.0 / energy
    logger.info(f"✅ Mod({a.label}) = {value:.6f} (residual {residual:.1e})")
    return ModulusEstimate(value=value, method=ModulusMethod.DIRICHLET, residual=residual)


def modulus_flat(d: float, l: float) -> ModulusEstimate:
    """Flat cylinder of height d and circumference l"""
    if not (d > 0 and l > 0):
        raise LabInputError("Flat modulus needs d > 0 and l > 0")
    return ModulusEstimate(value=d / l, method=ModulusMethod.FLAT_FORMULA)

# ============================================================================
# entropy_lab/sampling.py - Liouville measure samples (g-area x uniform angle)
# ============================================================================
# Surface fields: proposals are sigma-uniform in the hyperbolic disk of
# circumradius around 0, kept if they fall in the half-open octagon, then
# accepted with probability e^{2U} / max e^{2U}. Chart fields use the
# Euclidean disk and e^{2 lambda} instead.
# ============================================================================

import logging
import math
from typing import List, Optional, Tuple

import numpy as np

import config
from models import LabInputError
from surface_atlas.octagon import CIRCUMRADIUS
from conformal_field.field import MetricField, background_terms
from geodesic_engine.flow import CHART_MARGIN, TangentState

logger = logging.getLogger(__name__)

PROPOSAL_BATCH = 4096
MAX_PROPOSAL_ROUNDS = 10_000


def _log_density(m: MetricField, w: np.ndarray) -> np.ndarray:
    """ln of the g-area density against the proposal's reference area"""
    lam, _, _ = m.sample(w)
    if m.grid.is_surface:
        bg, _, _ = background_terms(w, m.background)
        return 2.0 * (lam - bg)
    return 2.0 * lam


def _density_ceiling(m: MetricField) -> float:
    points, _ = m.quadrature
    nodes = m.grid.z[m.grid.mask]
    if m.grid.is_surface:
        nodes = nodes[m.grid.atlas.contains(nodes)]
    else:
        nodes = nodes[np.abs(nodes) < CHART_MARGIN * m.grid.extent]
    return float(max(np.max(_log_density(m, points)), np.max(_log_density(m, nodes))))


def _proposals(m: MetricField, rng: np.random.Generator, size: int) -> np.ndarray:
    if m.grid.is_surface:
        # sigma-area inside hyperbolic radius r grows like cosh r - 1
        r = np.arccosh(1.0 + rng.uniform(size=size) * (math.cosh(CIRCUMRADIUS) - 1.0))
        z = np.tanh(r / 2.0) * np.exp(2j * math.pi * rng.uniform(size=size))
        return z[m.grid.atlas.contains_half_open(z)]
    radius = CHART_MARGIN * m.grid.extent
    return radius * np.sqrt(rng.uniform(size=size)) * np.exp(2j * math.pi * rng.uniform(size=size))


def liouville_arrays(m: MetricField, n: int, seed: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
    """(positions, unit g-speed velocities) of n Liouville samples"""
    if n < 1:
        raise LabInputError("Need at least one sample")
    rng = np.random.default_rng(config.SEED if seed is None else seed)
    ceiling = _density_ceiling(m)
    accepted: List[np.ndarray] = []
    count = 0
    for _ in range(MAX_PROPOSAL_ROUNDS):
        z = _proposals(m, rng, PROPOSAL_BATCH)
        z = z[~m.in_exclusion(z)]
        log_ratio = _log_density(m, z) - ceiling
        if np.any(log_ratio > 1e-9):
            logger.debug(f"density ceiling exceeded by {float(np.max(log_ratio)):.3e}")
        keep = rng.uniform(size=z.size) < np.exp(np.minimum(log_ratio, 0.0))
        accepted.append(z[keep])
        count += int(keep.sum())
        if count >= n:
            break
    else:
        raise LabInputError(f"Rejection sampling accepted only {count} of {n} points")
    z = np.concatenate(accepted)[:n]
    angle = 2.0 * math.pi * rng.uniform(size=n)
    lam = m.log_factor(z)
    v = np.exp(-lam) * np.exp(1j * angle)
    return z, v


def liouville_sample(m: MetricField, n: int, seed: Optional[int] = None) -> List[TangentState]:
    z, v = liouville_arrays(m, n, seed)
    return [TangentState(complex(p), complex(q), 1.0) for p, q in zip(z, v)]

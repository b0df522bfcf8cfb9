# ============================================================================
# entropy_lab/riccati.py - Liouville entropy from the unstable Riccati solution
# ============================================================================
# Along a unit-speed geodesic r' = -r^2 - K. Integrated forward, r is
# attracted to the unstable solution, whose time average is the positive
# Lyapunov exponent; its Liouville average is the metric entropy.
#
#   burn-in   [0, T0]  with T0 = T / 5, r only
#   average   [T0, T]  r plus its running integral
#
# The Jacobi cross-check integrates J'' + K J = 0 next to r on one path.
# ============================================================================

import logging
import math
from typing import Optional, Tuple

import numpy as np

import config
from models import EntropyEstimate, EntropyMethod, LabDomainError, LabInputError, NumericConvergenceError
from conformal_field.field import MetricField
from geodesic_engine.flow import GeodesicFlow, TangentState
from geodesic_engine.workers import parallel_map
from entropy_lab.sampling import liouville_arrays

logger = logging.getLogger(__name__)

ENTROPY_DT = 0.05
BURN_IN_FRACTION = 0.2
DEFAULT_BATCHES = 10
RESEED_FLOOR = -1e3
RESEED_VALUE = 0.0
JACOBI_RENORM = 1e50
POSITIVE_MASS_TOL = 1e-6


def riccati_rhs(K: np.ndarray, y: np.ndarray) -> np.ndarray:
    """y = [r, integral of r]"""
    r = y[:, 0]
    return np.column_stack([-r * r - K, r])


def riccati_rate(y: np.ndarray) -> np.ndarray:
    """|r|: the linearisation of r' = -r^2 - K has rate 2|r|"""
    return np.abs(y[:, 0])


def riccati_jacobi_rhs(K: np.ndarray, y: np.ndarray) -> np.ndarray:
    """y = [r, integral of r, J, J']"""
    r, J, P = y[:, 0], y[:, 2], y[:, 3]
    return np.column_stack([-r * r - K, r, P, -K * J])


class _Reseeder:
    """Monitor resetting r after a blow-up toward -inf (a conjugate point)"""

    def __init__(self):
        self.events = 0

    def __call__(self, y: np.ndarray, idx: np.ndarray) -> np.ndarray:
        bad = ~np.isfinite(y[:, 0]) | (y[:, 0] < RESEED_FLOOR)
        if np.any(bad):
            self.events += int(bad.sum())
            y = y.copy()
            y[bad, 0] = RESEED_VALUE
        return y


def _warn_positive_curvature(m: MetricField):
    positive, _ = m.curvature_masses()
    if positive > POSITIVE_MASS_TOL:
        logger.warning(f"⚠️ {m.label} carries positive curvature mass {positive:.3e}; "
                       f"Riccati solutions may blow up and get re-seeded")


def _batch_averages(flow: GeodesicFlow, z: np.ndarray, v: np.ndarray, T: float, T0: float):
    """Per-trajectory averages of r over [T0, T] (NaN when discarded) and re-seed count"""
    reseed = _Reseeder()
    y = np.column_stack([np.ones(z.size), np.zeros(z.size)])
    values = np.full(z.size, np.nan)
    alive = np.arange(z.size)
    if T0 > 0:
        warm = flow.run(z, v, T0, y0=y, rhs=riccati_rhs, rate=riccati_rate, monitor=reseed)
        keep = ~warm.truncated
        alive, z, v, y = alive[keep], warm.z[keep], warm.v[keep], warm.y[keep]
    if alive.size == 0:
        return values, reseed.events
    y = y.copy()
    y[:, 1] = 0.0
    main = flow.run(z, v, T - T0, y0=y, rhs=riccati_rhs, rate=riccati_rate, monitor=reseed)
    averages = main.y[:, 1] / (T - T0)
    averages[main.truncated] = np.nan
    values[alive] = averages
    return values, reseed.events


def metric_entropy_estimate(m: MetricField, n: int, T: float, seed: Optional[int] = None,
                            batches: int = DEFAULT_BATCHES, burn_in: Optional[float] = None,
                            dt: float = ENTROPY_DT, reverse: bool = False) -> EntropyEstimate:
    """Liouville average of the unstable Riccati solution.

    Samples are split into `batches` independent groups (run in parallel
    when LAB_WORKERS > 1); the standard error is that of the batch means.
    Trajectories reaching a cone-exclusion zone are discarded and counted.
    """
    if n < 1 or not T > 0:
        raise LabInputError("Need n >= 1 and T > 0")
    T0 = BURN_IN_FRACTION * T if burn_in is None else burn_in
    if not 0 <= T0 < T:
        raise LabInputError(f"Burn-in {T0} must lie in [0, T)")
    _warn_positive_curvature(m)
    seed = config.SEED if seed is None else seed
    z, v = liouville_arrays(m, n, seed)
    if reverse:
        v = -v
    flow = GeodesicFlow(m, dt, cell_limited=False)
    groups = [g for g in np.array_split(np.arange(n), min(batches, n)) if g.size]
    results = parallel_map(lambda g: _batch_averages(flow, z[g], v[g], T, T0), groups)

    values = np.concatenate([r[0] for r in results])
    reseeds = sum(r[1] for r in results)
    finite = np.isfinite(values)
    discarded = int((~finite).sum())
    if not np.any(finite):
        raise NumericConvergenceError(f"All {n} trajectories of {m.label} were discarded")
    means = [float(np.mean(r[0][np.isfinite(r[0])])) for r in results if np.any(np.isfinite(r[0]))]
    if len(means) >= 2:
        stderr = float(np.std(means, ddof=1) / math.sqrt(len(means)))
    else:
        stderr = float(np.std(values[finite]) / math.sqrt(max(int(finite.sum()) - 1, 1)))
    value = float(np.mean(values[finite]))
    if value < 0:
        logger.warning(f"⚠️ Negative Riccati average {value:.3e} on {m.label}, clipped to 0")
        value = 0.0
    if discarded:
        logger.warning(f"⚠️ {discarded} of {n} trajectories discarded near the cone ({discarded / n:.1%})")

    estimate = EntropyEstimate(
        value=value, stderr=stderr, samples=int(finite.sum()), horizon=T, burn_in=T0,
        method=EntropyMethod.RICCATI, reseeds=reseeds, discarded=discarded,
        details={"seed": seed, "dt": dt, "batches": len(means), "batch_means": means,
                 "discarded_fraction": discarded / n, "reverse": reverse, "metric": m.label},
    )
    logger.info(f"✅ h_metr({m.label}) = {value:.5f} ± {stderr:.5f} from {estimate.samples} trajectories")
    return estimate


def lyapunov_vs_jacobi_check(m: MetricField, state: TangentState, T: float,
                             dt: float = ENTROPY_DT) -> Tuple[float, float]:
    """(Riccati average, Jacobi growth rate) over [T/5, T] along one geodesic"""
    if not T > 0:
        raise LabInputError("Integration time must be positive")
    T0 = BURN_IN_FRACTION * T
    flow = GeodesicFlow(m, dt, cell_limited=False)
    reseed = _Reseeder()
    log_scale = [0.0]

    def monitor(y, idx):
        y = reseed(y, idx)
        size = abs(float(y[0, 2]))
        if size > JACOBI_RENORM:
            y = y.copy()
            y[:, 2:] /= size
            log_scale[0] += math.log(size)
        return y

    y0 = np.array([[1.0, 0.0, 1.0, 0.0]])
    warm = flow.run([state.position], [state.velocity], T0, y0=y0, rhs=riccati_jacobi_rhs,
                    rate=riccati_rate, monitor=monitor)
    if warm.truncated[0]:
        raise LabDomainError("Trajectory entered the cone-exclusion zone during burn-in")
    y = warm.y.copy()
    size = abs(float(y[0, 2]))
    if size == 0.0:
        raise NumericConvergenceError("Jacobi field vanished at the end of burn-in")
    y[0, 1] = 0.0
    y[0, 2:] /= size
    log_scale[0] = 0.0
    main = flow.run(warm.z, warm.v, T - T0, y0=y, rhs=riccati_jacobi_rhs,
                    rate=riccati_rate, monitor=monitor)
    if main.truncated[0]:
        raise LabDomainError("Trajectory entered the cone-exclusion zone")
    riccati = float(main.y[0, 1]) / (T - T0)
    jacobi = (log_scale[0] + math.log(abs(float(main.y[0, 2])))) / (T - T0)
    if reseed.events:
        logger.warning(f"⚠️ {reseed.events} Riccati re-seeds; the two averages need not agree")
    logger.debug(f"riccati {riccati:.6f} vs jacobi {jacobi:.6f}")
    return riccati, jacobi

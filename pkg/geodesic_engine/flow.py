# ============================================================================
# geodesic_engine/flow.py - Geodesic flow of e^{2 lambda}|dz|^2
# ============================================================================
# z' = v,  v' = -conj(grad lambda) v^2   (unit g-speed: e^{lambda}|v| = 1)
#
# Fixed-step RK4 in disk coordinates. After every step the position is
# pulled back into the octagon and the velocity is pushed by the same deck
# map, so the state always lives in the domain chart; the cumulative deck
# map of each trajectory is kept to unfold it into the universal cover.
# Extra scalar equations driven by K along the path (Riccati, Jacobi) ride
# along in the same RK4 stages.
# ============================================================================

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np

from models import LabInputError
from surface_atlas.isometry import DiskIsometry, apply_batch, compose_batch, derivative_batch
from surface_atlas.octagon import RANGE_LIMIT
from conformal_field.field import MetricField

logger = logging.getLogger(__name__)

DEFAULT_DT = 0.01
CELL_FRACTION = 0.5             # Euclidean step stays below half a grid cell
CHART_MARGIN = 0.999
APPROACH_FRACTION = 0.1         # Euclidean step below a tenth of the distance to the cone
CORE_FRACTION = 0.05            # distance floor inside a smoothing patch, relative to its extent

# rhs(K, y) -> dy/dt for the riding equations
ExtraRHS = Callable[[np.ndarray, np.ndarray], np.ndarray]
# rate(y) -> inverse time scale of the riding equations (stiffness bound on the step)
ExtraRate = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class TangentState:
    position: complex           # disk coordinate
    velocity: complex           # chart velocity dz/dt
    speed: float = 1.0          # g-speed e^{lambda}|v|

    def reversed(self) -> "TangentState":
        return TangentState(self.position, -self.velocity, self.speed)


def unit_state(m: MetricField, z: complex, angle: float) -> TangentState:
    """Unit g-speed tangent vector at z pointing at `angle` in the chart"""
    lam = float(m.log_factor(np.array([complex(z)]))[0])
    return TangentState(complex(z), math.exp(-lam) * complex(math.cos(angle), math.sin(angle)), 1.0)


def g_speed(m: MetricField, z, v) -> np.ndarray:
    lam = m.log_factor(np.asarray(z, dtype=complex))
    return np.exp(lam) * np.abs(v)


@dataclass
class GeodesicTrace:
    dt: float
    times: np.ndarray
    positions: np.ndarray               # domain-chart positions
    velocities: np.ndarray
    lift_a: np.ndarray                  # cumulative deck map (cover -> chart) per sample
    lift_b: np.ndarray
    transitions: List[Tuple[int, DiskIsometry]] = field(default_factory=list)
    length: float = 0.0
    truncated: bool = False
    reason: Optional[str] = None

    def unfolded(self) -> np.ndarray:
        """Positions in the universal cover (the original disk coordinates)"""
        return apply_batch(np.conj(self.lift_a), -self.lift_b, self.positions)

    def replay(self) -> DiskIsometry:
        """Compose the transition log; equals the final cumulative deck map"""
        total = DiskIsometry.identity()
        for _, h in self.transitions:
            total = h @ total
        return total

    @property
    def final_state(self) -> TangentState:
        return TangentState(complex(self.positions[-1]), complex(self.velocities[-1]), 1.0)


@dataclass
class FlowResult:
    """Vectorised end state of a batch of trajectories"""
    z: np.ndarray
    v: np.ndarray
    y: Optional[np.ndarray]
    t: np.ndarray
    lift_a: np.ndarray
    lift_b: np.ndarray
    truncated: np.ndarray
    steps: int


class GeodesicFlow:
    """RK4 integrator bound to one (read-only) MetricField"""

    def __init__(self, m: MetricField, dt: float = DEFAULT_DT, cell_limited: bool = True):
        if not dt > 0:
            raise LabInputError("Time step must be positive")
        self.m = m
        self.dt = dt
        self.cell = m.grid.h
        self.cell_limited = cell_limited
        self.cone = m.cone.point if m.cone is not None else None
        if m.patch is not None:
            self.core = CORE_FRACTION * m.patch.extent
        else:
            self.core = m.exclusion_radius

    # ---- evaluation ----------------------------------------------------------

    def _geometry(self, z: np.ndarray):
        """(lambda, grad lambda, K, valid) with invalid points (exclusion, off-chart) masked"""
        m = self.m
        limit = RANGE_LIMIT if m.grid.is_surface else CHART_MARGIN * m.grid.extent
        valid = np.isfinite(z) & (np.abs(z) < limit)
        safe = np.where(valid, z, 0j)
        lam, grad, K, w = m.geometry(safe)
        valid &= ~m.in_exclusion(w)
        return lam, grad, K, valid

    def _stage(self, z, v, y, rhs):
        lam, grad, K, valid = self._geometry(z)
        dv = -np.conj(grad) * v * v
        dy = rhs(K, y) if rhs is not None else None
        return v, dv, dy, lam, K, valid

    def _step_sizes(self, z, lam, K, y, rate, remaining):
        h = np.full(lam.shape, self.dt)
        if self.cell_limited:
            h = np.minimum(h, CELL_FRACTION * self.cell * np.exp(lam))
        h = np.minimum(h, self.dt / np.sqrt(np.maximum(1.0, np.abs(K))))
        if self.cone is not None:
            distance = np.maximum(np.abs(z - self.cone), self.core)
            h = np.minimum(h, APPROACH_FRACTION * distance * np.exp(lam))
        if rate is not None and y is not None:
            h = np.minimum(h, self.dt / np.maximum(1.0, rate(y)))
        return np.minimum(h, remaining)

    def _rk4(self, z, v, y, rhs, rate, remaining):
        k1z, k1v, k1y, lam, K, ok = self._stage(z, v, y, rhs)
        h = self._step_sizes(z, lam, K, y, rate, remaining)
        hy = h[:, None] if y is not None else None

        def shift(base, slope, factor, col=False):
            if base is None:
                return None
            return base + (hy if col else h) * factor * slope

        k2z, k2v, k2y, _, _, ok2 = self._stage(shift(z, k1z, 0.5), shift(v, k1v, 0.5), shift(y, k1y, 0.5, True), rhs)
        k3z, k3v, k3y, _, _, ok3 = self._stage(shift(z, k2z, 0.5), shift(v, k2v, 0.5), shift(y, k2y, 0.5, True), rhs)
        k4z, k4v, k4y, _, _, ok4 = self._stage(shift(z, k3z, 1.0), shift(v, k3v, 1.0), shift(y, k3y, 1.0, True), rhs)
        z_new = z + h / 6.0 * (k1z + 2 * k2z + 2 * k3z + k4z)
        v_new = v + h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
        y_new = None if y is None else y + hy / 6.0 * (k1y + 2 * k2y + 2 * k3y + k4y)
        return z_new, v_new, y_new, h, ok & ok2 & ok3 & ok4

    def _pull_back(self, z, v):
        """Canonicalise positions, push velocities by the same deck maps"""
        if not self.m.grid.is_surface:
            return z, v, np.ones_like(z), np.zeros_like(z)
        w, a, b = self.m.grid.atlas.canonicalize_batch(z)
        return w, v * derivative_batch(a, b, z), a, b

    # ---- driving -------------------------------------------------------------

    def run(self, z0, v0, T: float, y0: Optional[np.ndarray] = None, rhs: Optional[ExtraRHS] = None,
            rate: Optional[ExtraRate] = None,
            monitor: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None,
            recorder: Optional[Callable[..., None]] = None) -> FlowResult:
        """Integrate every trajectory for time T (each with its own adaptive RK4 step).

        rate(y) bounds the step by dt / rate for stiff riding equations;
        monitor(y, index) may return a corrected y after each step;
        recorder(index, z, v, t, a, b, moved) sees every accepted step.
        """
        if not T > 0:
            raise LabInputError("Integration time must be positive")
        z = np.array(z0, dtype=complex, ndmin=1)
        v = np.array(v0, dtype=complex, ndmin=1)
        y = None if y0 is None else np.array(y0, dtype=float, ndmin=2).copy()
        n = z.size
        z, v, lift_a, lift_b = self._pull_back(z, v)
        t = np.zeros(n)
        truncated = np.zeros(n, dtype=bool)
        steps = 0
        while True:
            active = np.flatnonzero(~truncated & (t < T - 1e-12))
            if active.size == 0:
                break
            zs, vs = z[active], v[active]
            ys = None if y is None else y[active]
            z_new, v_new, y_new, h, ok = self._rk4(zs, vs, ys, rhs, rate, T - t[active])
            bad = active[~ok]
            if bad.size:
                truncated[bad] = True
            good = ok
            idx = active[good]
            if idx.size == 0:
                continue
            w, v_pulled, a, b = self._pull_back(z_new[good], v_new[good])
            z[idx], v[idx] = w, v_pulled
            t[idx] += h[good]
            lift_a[idx], lift_b[idx] = compose_batch(a, b, lift_a[idx], lift_b[idx])
            if y is not None:
                y[idx] = y_new[good]
                if monitor is not None:
                    y[idx] = monitor(y[idx], idx)
            if recorder is not None:
                moved = (np.abs(a - 1.0) > 1e-15) | (np.abs(b) > 1e-15)
                recorder(idx, z[idx], v[idx], t[idx], a, b, moved)
            steps += 1
        if np.any(truncated):
            logger.info(f"{int(truncated.sum())} of {n} trajectories truncated at the exclusion zone")
        return FlowResult(z=z, v=v, y=y, t=t, lift_a=lift_a, lift_b=lift_b, truncated=truncated, steps=steps)


def integrate_geodesic(s: TangentState, T: float, m: MetricField, dt: float = DEFAULT_DT) -> GeodesicTrace:
    """Single trajectory with every sample and chart transition recorded"""
    flow = GeodesicFlow(m, dt)
    z0, v0 = np.array([s.position]), np.array([s.velocity])
    w0, v0p, a0, b0 = flow._pull_back(z0, v0)
    times, positions, velocities = [0.0], [complex(w0[0])], [complex(v0p[0])]
    lifts_a, lifts_b = [complex(a0[0])], [complex(b0[0])]
    transitions: List[Tuple[int, DiskIsometry]] = []
    if abs(a0[0] - 1.0) > 1e-15 or abs(b0[0]) > 1e-15:
        transitions.append((0, DiskIsometry.normalized(complex(a0[0]), complex(b0[0]))))

    def record(idx, z, v, t, a, b, moved):
        times.append(float(t[0]))
        positions.append(complex(z[0]))
        velocities.append(complex(v[0]))
        la, lb = compose_batch(a[0], b[0], lifts_a[-1], lifts_b[-1])
        lifts_a.append(complex(la))
        lifts_b.append(complex(lb))
        if moved[0]:
            transitions.append((len(times) - 1, DiskIsometry.normalized(complex(a[0]), complex(b[0]))))

    result = flow.run(w0, v0p, T, recorder=record)
    trace = GeodesicTrace(dt=dt, times=np.array(times), positions=np.array(positions),
                          velocities=np.array(velocities), lift_a=np.array(lifts_a), lift_b=np.array(lifts_b),
                          transitions=transitions, truncated=bool(result.truncated[0]))
    trace.length = float(trace.times[-1]) * s.speed
    if trace.truncated:
        trace.reason = "cone exclusion zone" if m.has_singularity else "left the chart"
        logger.warning(f"⚠️ Trajectory truncated at t = {trace.times[-1]:.4f} ({trace.reason})")
    return trace

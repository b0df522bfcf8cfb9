# ============================================================================
# geodesic_engine/loops.py - Closed polylines and their g-shortening
# ============================================================================
# A closed loop in class w is a polyline v_0 .. v_{N-1} in the disk whose
# closing vertex is H(v_0), H the lift of w's deck transformation. Discrete
# g-length: sum over segments of e^{U(midpoint)} d_sigma(v_i, v_{i+1}), exact
# for sigma-geodesic polylines and deck invariant because U is.
# ============================================================================

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
from scipy.optimize import minimize

from models import LabInputError, LabRangeError, NumericConvergenceError
from surface_atlas.isometry import DiskIsometry, translation_length
from surface_atlas.classes import word_axis_polyline
from surface_atlas.words import GroupWord, word_to_isometry
from conformal_field.field import MetricField, background_terms

logger = logging.getLogger(__name__)

MIN_VERTICES = 64
VERTICES_PER_LENGTH = 20
REPARAM_EVERY = 50
STALL_WINDOW = 100
STALL_TOLERANCE = 1e-10
MAX_ITERATIONS = 5000
DISK_GUARD = 1.0 - 1e-7
POSITIVE_MASS_TOL = 1e-6


@dataclass
class ClosedGeodesic:
    word: GroupWord
    vertices: np.ndarray            # lifted polyline, closing vertex isometry(vertices[0])
    isometry: DiskIsometry
    length: float = 0.0
    residual: float = 0.0
    history: List[float] = field(default_factory=list, repr=False)

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=complex)

    @property
    def closing_vertex(self) -> complex:
        return complex(self.isometry.apply(self.vertices[0]))

    def closure_defect(self, atlas) -> float:
        """|translation length of the lifted isometry - that of the word|"""
        return abs(translation_length(self.isometry) - translation_length(word_to_isometry(self.word, atlas)))

    def power(self, k: int) -> "ClosedGeodesic":
        """Same loop traversed k times (word w^k)"""
        if k < 1:
            raise LabInputError("power needs k >= 1")
        verts, h = [self.vertices], DiskIsometry.identity()
        for _ in range(k - 1):
            h = self.isometry @ h
            verts.append(h.apply(self.vertices))
        total = DiskIsometry.identity()
        for _ in range(k):
            total = self.isometry @ total
        return ClosedGeodesic(word=self.word.power(k), vertices=np.concatenate(verts), isometry=total,
                              length=k * self.length, residual=self.residual)

    def to_dict(self) -> dict:
        return {
            "word": list(self.word.letters),
            "vertices": [[z.real, z.imag] for z in self.vertices],
            "isometry": self.isometry.to_dict(),
            "length": self.length,
            "residual": self.residual,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ClosedGeodesic":
        return cls(word=GroupWord.of(data["word"]),
                   vertices=np.array([complex(x, y) for x, y in data["vertices"]]),
                   isometry=DiskIsometry.from_dict(data["isometry"]),
                   length=float(data["length"]), residual=float(data["residual"]))


def save_geodesic(g: ClosedGeodesic, path: Union[str, Path]) -> Path:
    path = Path(path).with_suffix(".json")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(g.to_dict(), indent=2, sort_keys=True))
    return path


def load_geodesic(path: Union[str, Path]) -> ClosedGeodesic:
    path = Path(path)
    if not path.exists():
        raise LabInputError(f"Geodesic file {path} does not exist")
    return ClosedGeodesic.from_dict(json.loads(path.read_text()))


# ---- discrete length ---------------------------------------------------------

def vertex_count(sigma_length: float) -> int:
    return max(MIN_VERTICES, int(math.ceil(VERTICES_PER_LENGTH * sigma_length)))


def _segments(vertices: np.ndarray, isometry: DiskIsometry) -> np.ndarray:
    return np.concatenate([vertices[1:], [isometry.apply(vertices[0])]])


def _require_surface(m: MetricField):
    if not m.grid.is_surface:
        raise LabInputError("Closed loops live on the surface; got a chart field")


def _length_and_gradient(vertices: np.ndarray, isometry: DiskIsometry, m: MetricField,
                         with_gradient: bool = True):
    p = vertices
    q = _segments(vertices, isometry)
    dp, dq = 1.0 - np.abs(p) ** 2, 1.0 - np.abs(q) ** 2
    delta = np.abs(p - q) ** 2 / (dp * dq)
    d = 2.0 * np.arcsinh(np.sqrt(delta))
    mid = 0.5 * (p + q)
    lam, grad_lam, _, _ = m.geometry(mid)
    bg, grad_bg, _ = background_terms(mid, m.background)
    f = np.exp(lam - bg)
    length = float(np.sum(f * d))
    if not with_gradient:
        return length, None

    grad_U = grad_lam - grad_bg
    safe = delta > 1e-30
    scale = np.where(safe, 1.0 / np.sqrt(np.where(safe, delta * (1.0 + delta), 1.0)), 0.0)
    grad_p = scale * (2.0 * (p - q) / (dp * dq) + 2.0 * p * delta / dp)
    grad_q = scale * (2.0 * (q - p) / (dp * dq) + 2.0 * q * delta / dq)
    g_p = f * grad_p + 0.5 * d * f * grad_U
    g_q = f * grad_q + 0.5 * d * f * grad_U
    G = g_p.copy()
    G[1:] += g_q[:-1]
    G[0] += np.conj(isometry.derivative(p[0])) * g_q[-1]
    return length, G


def loop_length(poly, m: MetricField) -> float:
    """g-length of a closed polyline (anything with vertices and isometry)"""
    _require_surface(m)
    vertices = np.asarray(poly.vertices, dtype=complex)
    if vertices.size == 0:
        return 0.0
    length, _ = _length_and_gradient(vertices, poly.isometry, m, with_gradient=False)
    return length


def reparametrize(vertices: np.ndarray, isometry: DiskIsometry, m: MetricField) -> np.ndarray:
    """Redistribute vertices at equal g-length along the polyline, keeping v_0"""
    p = vertices
    q = _segments(vertices, isometry)
    lam, _, _, _ = m.geometry(0.5 * (p + q))
    bg, _, _ = background_terms(0.5 * (p + q), m.background)
    seg = np.exp(lam - bg) * 2.0 * np.arcsinh(np.sqrt(np.abs(p - q) ** 2 / ((1 - np.abs(p) ** 2) * (1 - np.abs(q) ** 2))))
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    targets = cum[-1] * np.arange(p.size) / p.size
    idx = np.clip(np.searchsorted(cum, targets, side="right") - 1, 0, p.size - 1)
    frac = np.where(seg[idx] > 0, (targets - cum[idx]) / np.where(seg[idx] > 0, seg[idx], 1.0), 0.0)
    return p[idx] + frac * (q[idx] - p[idx])


# ---- shortening ------------------------------------------------------------------

def initial_polyline(w: GroupWord, m: MetricField, n: Optional[int] = None, seed: Optional[int] = None,
                     jitter: float = 0.0) -> ClosedGeodesic:
    """sigma-axis polyline of w, optionally perturbed (seeded) off the axis"""
    _require_surface(m)
    h = word_to_isometry(w, m.grid.atlas)
    ell = translation_length(h)
    if ell <= 1e-9:
        raise LabInputError(f"Word {w.label()} is trivial on the surface; no closed geodesic")
    n = n or vertex_count(ell)
    vertices, lifted = word_axis_polyline(h, m.grid.atlas, n)
    if jitter > 0:
        rng = np.random.default_rng(seed)
        phase = np.exp(2j * math.pi * rng.uniform())
        modes = rng.normal(size=3) + 1j * rng.normal(size=3)
        k = np.arange(n) / n
        bend = sum(c * np.sin(2 * math.pi * (j + 1) * k) for j, c in enumerate(modes)) * phase
        vertices = vertices + jitter * (1.0 - np.abs(vertices) ** 2) * bend / 4.0
    return ClosedGeodesic(word=w, vertices=vertices, isometry=lifted, length=0.0)


def _pack(vertices: np.ndarray) -> np.ndarray:
    return np.concatenate([vertices.real, vertices.imag])


def _unpack(x: np.ndarray) -> np.ndarray:
    n = x.size // 2
    return x[:n] + 1j * x[n:]


def shorten_loop(w: GroupWord, m: MetricField, n: Optional[int] = None, seed: Optional[int] = None,
                 jitter: float = 0.0, max_iterations: int = MAX_ITERATIONS) -> ClosedGeodesic:
    """
    Minimise discrete g-length in the free homotopy class of w.

    Quasi-Newton descent (scipy L-BFGS-B with its monotone line search)
    stands in for plain projected gradient descent with backtracking: the
    minimiser is the same, the iterates and their count are not. An
    iteration here is one L-BFGS-B iteration, and a descent that fails to
    lower the length is discarded. Restarted every REPARAM_EVERY
    iterations after an equal-length reparametrisation. Stops once the
    relative decrease over STALL_WINDOW iterations drops below
    STALL_TOLERANCE or L-BFGS-B converges before REPARAM_EVERY iterations.
    """
    _require_surface(m)
    if m.curvature_masses()[0] > POSITIVE_MASS_TOL:
        logger.warning(f"⚠️ {m.label} has positive curvature; the minimiser of {w.label()} may not be unique")
    loop = initial_polyline(w, m, n=n, seed=seed, jitter=jitter)
    H = loop.isometry
    vertices = loop.vertices
    big = 1e10

    def objective(x):
        V = _unpack(x)
        if not np.all(np.isfinite(V)) or np.any(np.abs(V) >= DISK_GUARD) \
                or abs(complex(H.apply(V[0]))) >= DISK_GUARD:
            return big, np.zeros_like(x)
        try:
            L, G = _length_and_gradient(V, H, m)
        except LabRangeError:
            return big, np.zeros_like(x)
        return L, _pack(G)

    current, _ = _length_and_gradient(vertices, H, m, with_gradient=False)
    history = [current]
    residual = float("nan")
    converged = False
    while len(history) - 1 < max_iterations:
        result = minimize(objective, _pack(vertices), jac=True, method="L-BFGS-B",
                          callback=lambda intermediate_result: history.append(float(intermediate_result.fun)),
                          options={"maxiter": REPARAM_EVERY, "gtol": 1e-12, "ftol": 1e-15, "maxcor": 20})
        if result.fun <= current:
            vertices, current = _unpack(result.x), float(result.fun)
        residual = float(np.max(np.abs(result.jac))) if result.jac is not None else float("nan")
        if result.nit < REPARAM_EVERY:
            converged = True
            break
        if len(history) > STALL_WINDOW and history[-STALL_WINDOW - 1] - history[-1] <= STALL_TOLERANCE * history[-1]:
            converged = True
            break
        moved = reparametrize(vertices, H, m)
        moved_length, _ = _length_and_gradient(moved, H, m, with_gradient=False)
        if moved_length <= current:
            vertices, current = moved, moved_length
            history.append(current)

    best = ClosedGeodesic(word=w, vertices=vertices, isometry=H, length=current, residual=residual, history=history)
    if not converged:
        logger.error(f"❌ Loop {w.label()} did not settle in {max_iterations} iterations on {m.label}")
        raise NumericConvergenceError(f"shorten_loop({w.label()}) did not converge", residual=residual, best=best)
    logger.debug(f"Shortened {w.label()} on {m.label}: {current:.8f} after {len(history) - 1} iterations")
    return best


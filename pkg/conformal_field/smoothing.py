# ============================================================================
# conformal_field/smoothing.py - Smoothing the cone point into a hyperbolic cap
# ============================================================================
# In the chart zeta (|zeta| < 1) around the cone the metric is e^{2 u0}|dzeta|^2
# with u0 = beta ln r + a0. The smoothed exponent replaces u0 near 0 by the
# hyperbolic cap v_k = C_k - ln(1 - r^2):
#     u_k = psi(u0 - v_k) + u0
# which equals v_k where u0 - v_k <= -1 and u0 where u0 - v_k >= 1.

import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from models import LabInputError

logger = logging.getLogger(__name__)


# ---- psi -------------------------------------------------------------------

def psi(s):
    """C^2 transition: -s for s <= -1, 0 for s >= 1, psi'' = 3/4 (1 - s^2) between"""
    s = np.asarray(s, dtype=float)
    middle = 3.0 / 16.0 - s / 2.0 + 3.0 * s ** 2 / 8.0 - s ** 4 / 16.0
    out = np.where(s <= -1.0, -s, np.where(s >= 1.0, 0.0, middle))
    return float(out) if out.ndim == 0 else out


def psi_prime(s):
    s = np.asarray(s, dtype=float)
    middle = -0.5 + 0.75 * s - 0.25 * s ** 3
    out = np.where(s <= -1.0, -1.0, np.where(s >= 1.0, 0.0, middle))
    return float(out) if out.ndim == 0 else out


def psi_second(s):
    s = np.asarray(s, dtype=float)
    out = np.where(np.abs(s) < 1.0, 0.75 * (1.0 - s ** 2), 0.0)
    return float(out) if out.ndim == 0 else out


# ---- constants -------------------------------------------------------------

def minimal_smoothing_index(beta: float) -> float:
    """k must exceed sqrt((beta + 2)/beta)"""
    if not beta > 0:
        raise LabInputError("Cone order beta must be positive")
    return math.sqrt((beta + 2.0) / beta)


def smoothing_radius(k: int, beta: float) -> float:
    """Chart radius 1/(2k) + sqrt(beta/(beta + 2))/2 beyond which u_k = u0"""
    return 1.0 / (2.0 * k) + 0.5 * math.sqrt(beta / (beta + 2.0))


def smoothing_constant(k: int, beta: float, min_a0: float) -> float:
    """C_k = ln(1 - 1/k^2) - 1 + beta ln(1/k) + min a0"""
    return math.log(1.0 - 1.0 / k ** 2) - 1.0 + beta * math.log(1.0 / k) + min_a0


@dataclass(frozen=True)
class SmoothingPatch:
    k: int
    beta: float
    C_k: float
    min_a0: float
    rho0: float = 1.0     # z = rho0 * zeta

    def __post_init__(self):
        if self.k <= minimal_smoothing_index(self.beta):
            raise LabInputError(
                f"k = {self.k} too small; need k > {minimal_smoothing_index(self.beta):.4f} for beta = {self.beta}")

    @classmethod
    def build(cls, k: int, beta: float, min_a0: float, rho0: float = 1.0) -> "SmoothingPatch":
        if isinstance(k, bool) or int(k) != k:
            raise LabInputError(f"Smoothing index must be an integer, got {k!r}")
        k = int(k)
        if k <= minimal_smoothing_index(beta):
            raise LabInputError(
                f"k = {k} too small; need k > {minimal_smoothing_index(beta):.4f} for beta = {beta}")
        return cls(k=k, beta=beta, C_k=smoothing_constant(k, beta, min_a0), min_a0=min_a0, rho0=rho0)

    @property
    def radius(self) -> float:
        return smoothing_radius(self.k, self.beta)

    @property
    def extent(self) -> float:
        """Patch radius in disk coordinates"""
        return self.rho0 * self.radius

    def shifted(self, c: float) -> "SmoothingPatch":
        """Patch of the field u + c (a0 and C_k move together)"""
        return replace(self, C_k=self.C_k + c, min_a0=self.min_a0 + c)

    def evaluate(self, zeta, a0, grad_a0, lap_a0):
        """(u_k, grad u_k, Laplacian u_k) in the zeta chart; gradients are complex (d/dx + i d/dy)"""
        zeta = np.asarray(zeta, dtype=complex)
        r = np.maximum(np.abs(zeta), 1e-150)
        u0 = self.beta * np.log(r) + a0
        grad_u0 = self.beta * zeta / r ** 2 + grad_a0
        one_minus = 1.0 - r ** 2
        v = self.C_k - np.log(one_minus)
        grad_v = 2.0 * zeta / one_minus
        lap_v = 4.0 / one_minus ** 2
        s = u0 - v
        grad_s = grad_u0 - grad_v
        p1, p2 = psi_prime(s), psi_second(s)
        core = s <= -1.0
        u = np.where(core, v, psi(s) + u0)
        grad = np.where(core, grad_v, (1.0 + p1) * grad_u0 - p1 * grad_v)
        lap = np.where(core, lap_v, p2 * np.abs(grad_s) ** 2 - p1 * lap_v + (1.0 + p1) * lap_a0)
        return u, grad, lap

    def to_dict(self) -> dict:
        return {"k": self.k, "beta": self.beta, "C_k": self.C_k, "min_a0": self.min_a0, "rho0": self.rho0}

    @classmethod
    def from_dict(cls, data: dict) -> "SmoothingPatch":
        return cls(**data)

# ============================================================================
# surface_atlas/isometry.py - Orientation-preserving isometries of the disk
# ============================================================================
# A map z -> (a z + b) / (conj(b) z + conj(a)) with |a|^2 - |b|^2 = 1,
# i.e. the SU(1,1) matrix [[a, b], [conj(b), conj(a)]]. Projectively
# (a, b) and (-a, -b) are the same map.

import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from models import LabInputError

logger = logging.getLogger(__name__)

@dataclass(frozen=True)
class DiskIsometry:
    a: complex
    b: complex

    def __post_init__(self):
        det = abs(self.a) ** 2 - abs(self.b) ** 2
        if not math.isfinite(det) or det <= 0:
            raise LabInputError(f"Not a disk isometry: |a|^2-|b|^2 = {det}")

    # ---- construction ------------------------------------------------------

    @classmethod
    def identity(cls) -> "DiskIsometry":
        return cls(1.0 + 0j, 0j)

    @classmethod
    def normalized(cls, a: complex, b: complex) -> "DiskIsometry":
        """Rescale (a, b) back onto |a|^2 - |b|^2 = 1"""
        det = abs(a) ** 2 - abs(b) ** 2
        if det <= 0:
            raise LabInputError(f"Cannot normalize: |a|^2-|b|^2 = {det}")
        s = math.sqrt(det)
        return cls(complex(a) / s, complex(b) / s)

    @classmethod
    def translation(cls, distance: float, direction: float) -> "DiskIsometry":
        """Hyperbolic translation by `distance` along the diameter at angle `direction`"""
        half = distance / 2.0
        return cls(complex(math.cosh(half)), math.sinh(half) * complex(math.cos(direction), math.sin(direction)))

    @classmethod
    def rotation(cls, angle: float) -> "DiskIsometry":
        half = angle / 2.0
        return cls(complex(math.cos(half), math.sin(half)), 0j)

    # ---- group structure ---------------------------------------------------

    def compose(self, other: "DiskIsometry") -> "DiskIsometry":
        """self o other (other acts first)"""
        a1, b1, a2, b2 = self.a, self.b, other.a, other.b
        return DiskIsometry.normalized(a1 * a2 + b1 * b2.conjugate(), a1 * b2 + b1 * a2.conjugate())

    def __matmul__(self, other: "DiskIsometry") -> "DiskIsometry":
        return self.compose(other)

    def inverse(self) -> "DiskIsometry":
        return DiskIsometry(self.a.conjugate(), -self.b)

    @property
    def determinant(self) -> float:
        return abs(self.a) ** 2 - abs(self.b) ** 2

    @property
    def trace(self) -> float:
        """Trace of the SU(1,1) matrix, 2 Re(a)"""
        return 2.0 * self.a.real

    # ---- action ------------------------------------------------------------

    def apply(self, z):
        z = complex(z) if np.isscalar(z) else np.asarray(z, dtype=complex)
        return (self.a * z + self.b) / (self.b.conjugate() * z + self.a.conjugate())

    def derivative(self, z):
        z = complex(z) if np.isscalar(z) else np.asarray(z, dtype=complex)
        return 1.0 / (self.b.conjugate() * z + self.a.conjugate()) ** 2

    def close_to(self, other: "DiskIsometry", tol: float = 1e-9) -> bool:
        """Projective equality: (a, b) ~ (-a, -b)"""
        plus = max(abs(self.a - other.a), abs(self.b - other.b))
        minus = max(abs(self.a + other.a), abs(self.b + other.b))
        return min(plus, minus) <= tol

    def is_identity(self, tol: float = 1e-9) -> bool:
        return self.close_to(DiskIsometry.identity(), tol)

    # ---- hyperbolic data ---------------------------------------------------

    def fixed_points(self) -> Tuple[complex, complex]:
        """(repelling, attracting) boundary fixed points of a hyperbolic map"""
        re = self.a.real
        if abs(re) <= 1.0:
            raise LabInputError("Isometry is not hyperbolic; no axis")
        root = math.copysign(math.sqrt(re * re - 1.0), re)
        im = 1j * self.a.imag
        bc = self.b.conjugate()
        attracting = (im + root) / bc
        repelling = (im - root) / bc
        # boundary points; renormalize away rounding
        return repelling / abs(repelling), attracting / abs(attracting)

    def to_dict(self) -> dict:
        return {"a": [self.a.real, self.a.imag], "b": [self.b.real, self.b.imag]}

    @classmethod
    def from_dict(cls, data: dict) -> "DiskIsometry":
        return cls(complex(*data["a"]), complex(*data["b"]))


def translation_length(m: DiskIsometry) -> float:
    """2 arccosh(|tr|/2); 0 for elliptic, parabolic and identity maps"""
    half_trace = abs(m.a.real)
    if half_trace <= 1.0:
        return 0.0
    return 2.0 * math.acosh(half_trace)


# ---- distances -------------------------------------------------------------

def disk_distance(p, q):
    """Hyperbolic distance in the Poincare disk (curvature -1); vectorised"""
    p = np.asarray(p, dtype=complex)
    q = np.asarray(q, dtype=complex)
    quotient = np.abs(p - q) ** 2 / ((1.0 - np.abs(p) ** 2) * (1.0 - np.abs(q) ** 2))
    d = 2.0 * np.arcsinh(np.sqrt(quotient))
    return float(d) if d.ndim == 0 else d


def distance_between_geodesics(p1: complex, p2: complex, q1: complex, q2: complex) -> float:
    """Distance between geodesics with boundary endpoints (p1, p2) and (q1, q2).

    Zero when they cross or share an endpoint.
    """
    cross = ((p1 - q1) * (p2 - q2)) / ((p1 - q2) * (p2 - q1))
    if abs(cross.imag) > 1e-6 * max(1.0, abs(cross)):
        logger.warning(f"⚠️ Non-real cross ratio {cross} for boundary points")
    value = cross.real
    if value <= 0:
        return 0.0
    ratio = min(value, 1.0 / value)
    return 2.0 * math.atanh(math.sqrt(ratio))


# ---- array helpers (batched maps) -----------------------------------------

def apply_batch(a, b, z):
    """Apply many isometries (arrays a, b) to matching points z"""
    return (a * z + b) / (np.conj(b) * z + np.conj(a))


def derivative_batch(a, b, z):
    return 1.0 / (np.conj(b) * z + np.conj(a)) ** 2


def compose_batch(a1, b1, a2, b2):
    """(a1, b1) o (a2, b2) elementwise"""
    return a1 * a2 + b1 * np.conj(b2), a1 * b2 + b1 * np.conj(a2)

# ============================================================================
# conformal_modulus/bounds.py - Modulus lower bounds and the E(sigma) interval
# ============================================================================

import logging
import math
from typing import List, NamedTuple, Optional

from models import LabInputError
from surface_atlas.octagon import FundamentalOctagon
from surface_atlas.classes import chord_crossings, distinct_geodesic_classes
from surface_atlas.words import enumerate_classes
from conformal_modulus.annulus import collar_annulus
from conformal_modulus.solver import modulus_dirichlet

logger = logging.getLogger(__name__)


def _check_lengths(d: float, l: float, chi: int):
    if d < 0:
        raise LabInputError("Distance between the boundary curves must be non-negative")
    if not l > 0:
        raise LabInputError("Boundary length must be positive")
    if chi >= 0:
        raise LabInputError("Euler characteristic must be negative")


def modulus_lower_bound_nonpositive(d: float, l: float, chi: int) -> float:
    """(1/(-2 pi chi)) ln(1 - 2 pi chi d / l) for non-positively curved metrics"""
    _check_lengths(d, l, chi)
    k = -2.0 * math.pi * chi
    return math.log1p(k * d / l) / k


def nofocal_modulus_constant(chi: int, Cpos: float, C2: float) -> float:
    """C3 = -2 pi chi + (total positive curvature) + (boundary curvature bound)"""
    return -2.0 * math.pi * chi + Cpos + C2


def modulus_lower_bound_nofocal(d: float, l: float, chi: int, Cpos: float, C2: float,
                                C3: Optional[float] = None) -> float:
    """
    (1/C3) ln(1 + C3 d / l) for metrics without focal points.

    C3 defaults to nofocal_modulus_constant(chi, Cpos, C2); an explicit C3
    must be at least that value.
    """
    _check_lengths(d, l, chi)
    if Cpos < 0 or C2 < 0:
        raise LabInputError("Curvature bounds must be non-negative")
    c3 = nofocal_modulus_constant(chi, Cpos, C2)
    if C3 is not None:
        if C3 < c3:
            raise LabInputError(f"C3 = {C3} is below -2 pi chi + Cpos + C2 = {c3}")
        c3 = C3
    return math.log1p(c3 * d / l) / c3


class EInterval(NamedTuple):
    lower: float
    upper: float


def estimate_E(atlas: FundamentalOctagon, cells: Optional[int] = None, max_word_len: int = 1) -> EInterval:
    """
    Interval for E(sigma) = sup of sigma-moduli of embedded annuli.

    lower: largest Dirichlet modulus over maximal embedded collars of the
    simple classes with words up to max_word_len; upper: pi / sys(sigma).
    """
    upper = math.pi / atlas.systole
    lower, best = 0.0, None
    classes = distinct_geodesic_classes(enumerate_classes(atlas, max_word_len), atlas)
    for cls in classes:
        if chord_crossings(cls.decomposition) != 0:
            continue
        value = modulus_dirichlet(collar_annulus(cls.word, atlas, cells=cells), atlas).value
        if value > lower:
            lower, best = value, cls.word
    if lower > upper:
        logger.warning(f"⚠️ Collar modulus {lower:.6f} exceeds the collar bound {upper:.6f}; clamping")
        lower = upper
    logger.info(f"✅ E(sigma) in [{lower:.6f}, {upper:.6f}]"
                + (f", lower from {best.label()}" if best is not None else ""))
    return EInterval(lower, upper)

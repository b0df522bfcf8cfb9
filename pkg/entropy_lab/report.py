# ============================================================================
# entropy_lab/report.py - Entropy ordering and the systole-entropy product
# ============================================================================
# For area A the chain reads
#     h_metr(g) <= sqrt(-2 pi chi / A) <= h_top(g)
# with equality everywhere exactly for constant curvature. Constant
# curvature fields are checked in "equality" mode, the rest in "strict".
# ============================================================================

import logging
import math
from typing import Optional

import numpy as np

from models import EntropyEstimate, EntropyOrderReport, LabInputError
from surface_atlas.octagon import CHI, SYSTOLE
from conformal_field.field import MetricField
from geodesic_engine.systole import systole
from entropy_lab.riccati import metric_entropy_estimate
from entropy_lab.counting import topological_entropy_counting

logger = logging.getLogger(__name__)

CONSTANT_K_TOL = 1e-6
METRIC_TOLERANCE = 0.02         # relative, constant-curvature Riccati calibration
COUNTING_TOLERANCE = 0.15       # relative, finite-L counting bias
STANDARD_ERRORS = 3.0
COUNTING_LENGTH = 8.0           # sigma-length where counting is calibrated


def area_entropy(chi: int, A: float) -> float:
    """sqrt(-2 pi chi / A): the common value of both entropies at constant curvature"""
    if chi >= 0 or not A > 0:
        raise LabInputError("Need chi < 0 and A > 0")
    return math.sqrt(-2.0 * math.pi * chi / A)


def has_constant_curvature(m: MetricField) -> bool:
    if m.cone is not None:
        return False
    points, _ = m.quadrature
    K = m.curvature_at_domain_points(points)
    return float(np.ptp(K)) <= CONSTANT_K_TOL * max(1.0, float(np.max(np.abs(K))))


def order_from_estimates(m: MetricField, metr: EntropyEstimate, top: EntropyEstimate) -> EntropyOrderReport:
    """Ordering verdict for estimates already computed on m"""
    A = m.area()
    middle = area_entropy(CHI, A)
    metr_margin = max(STANDARD_ERRORS * metr.stderr, METRIC_TOLERANCE * middle)
    top_margin = max(STANDARD_ERRORS * top.stderr, COUNTING_TOLERANCE * middle)
    if has_constant_curvature(m):
        mode = "equality"
        passed = abs(metr.value - middle) <= metr_margin and abs(top.value - middle) <= top_margin
    else:
        mode = "strict"
        passed = metr.value < middle - STANDARD_ERRORS * metr.stderr and top.value > middle - top_margin

    report = EntropyOrderReport(
        metric=m.label, area=A, h_metr=metr.value, h_metr_stderr=metr.stderr, middle=middle,
        h_top=top.value, h_top_stderr=top.stderr, mode=mode, passed=passed,
        details={"n": metr.samples + metr.discarded, "T": metr.horizon, "L": top.horizon,
                 "seed": metr.details.get("seed"), "reseeds": metr.reseeds, "discarded": metr.discarded,
                 "counting_truncated": top.truncated, "counting_raw": top.raw,
                 "counting_slope": top.details.get("slope")},
    )
    status = "✅" if passed else "❌"
    logger.info(f"{status} Entropy ordering on {m.label} ({mode}): "
                f"{metr.value:.4f} | {middle:.4f} | {top.value:.4f}")
    return report


def counting_length(m: MetricField) -> float:
    """The calibrated counting length, scaled with the metric's size"""
    return COUNTING_LENGTH * math.sqrt(m.area() / (4.0 * math.pi))


def entropy_order_report(m: MetricField, n: int = 200, T: float = 50.0, L: Optional[float] = None,
                         seed: Optional[int] = None, max_word_len: Optional[int] = None) -> EntropyOrderReport:
    metr = metric_entropy_estimate(m, n, T, seed=seed)
    top = topological_entropy_counting(m, counting_length(m) if L is None else L, max_word_len=max_word_len)
    return order_from_estimates(m, metr, top)


def sabourau_product(m: MetricField, max_word_len: int = 1, L: Optional[float] = None) -> float:
    """sys(g) * h_top(g); counting runs at a fixed multiple of the systole, so the product is scale free"""
    sys_g = systole(m, max_word_len).length
    L = COUNTING_LENGTH * sys_g / SYSTOLE if L is None else L
    h = topological_entropy_counting(m, L).value
    product = sys_g * h
    logger.info(f"sys x h_top for {m.label}: {sys_g:.5f} x {h:.5f} = {product:.5f}")
    return product

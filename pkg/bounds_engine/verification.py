# ============================================================================
# bounds_engine/verification.py - Systole bound checked against measured systoles
# ============================================================================

import logging
import math
from typing import List, Sequence

from models import BoundInputs, BoundTheorem, VerdictRow, VerificationFailure
from conformal_field.field import MetricField
from geodesic_engine.systole import systole
from bounds_engine.constants import bound_for

logger = logging.getLogger(__name__)

AREA_TOL = 1e-3                 # relative
POSITIVE_MASS_TOL = 1e-4        # absolute, absorbs discretisation noise on flat parts


def _hypothesis_violation(m: MetricField, b: BoundInputs, theorem: BoundTheorem):
    """Reason the metric falls outside the theorem's class, or None"""
    if not m.grid.is_surface:
        return "not a surface field"
    area = m.area()
    if abs(area - b.A) > AREA_TOL * b.A:
        return f"area mismatch (A = {area:.6g}, expected {b.A:.6g})"
    positive, _ = m.curvature_masses()
    if theorem == BoundTheorem.NONPOSITIVE and positive > POSITIVE_MASS_TOL:
        return f"positive curvature mass {positive:.3e}"
    if theorem == BoundTheorem.NOFOCAL and positive >= 2.0 * math.pi - b.eps:
        return f"positive curvature mass {positive:.4f} >= 2 pi - eps"
    return None


def verify_systole_bound(family: Sequence[MetricField], b: BoundInputs,
                         theorem: BoundTheorem = BoundTheorem.NONPOSITIVE,
                         max_word_len: int = 1) -> List[VerdictRow]:
    """One verdict row per metric; a row fails only when sys(g) < C"""
    report = bound_for(b, theorem)
    rows: List[VerdictRow] = []
    for m in family:
        reason = _hypothesis_violation(m, b, theorem)
        if reason is not None:
            logger.warning(f"⚠️ {m.label} excluded: {reason}")
            rows.append(VerdictRow(metric=m.label, C=report.C, excluded=True, reason=reason))
            continue
        result = systole(m, max_word_len)
        passed = result.length >= report.C
        rows.append(VerdictRow(metric=m.label, systole=result.length, C=report.C,
                               margin=result.length - report.C, passed=passed,
                               certified=result.certified))
        if not passed:
            logger.error(f"❌ {m.label}: systole {result.length:.6g} below C = {report.C:.6g}")
    checked = [r for r in rows if not r.excluded]
    logger.info(f"✅ Systole bound ({theorem.value}, ln C = {report.ln_C:.4f}): "
                f"{sum(bool(r.passed) for r in checked)}/{len(checked)} pass, "
                f"{len(rows) - len(checked)} excluded")
    return rows


def require_all_pass(rows: Sequence[VerdictRow]) -> None:
    failed = [r.metric for r in rows if not r.excluded and not r.passed]
    if failed:
        raise VerificationFailure(f"Systole bound violated for: {', '.join(failed)}")

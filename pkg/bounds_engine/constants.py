# ============================================================================
# bounds_engine/constants.py - Explicit systole constants in log domain
# ============================================================================
# Every quantity that can exceed double range (R_hat ~ e^63 at genus 2) is
# carried as a natural logarithm; sums go through logsumexp.

import logging
import math

from scipy.special import logsumexp

from models import BoundInputs, BoundReport, BoundTheorem, EntropyBoundReport, LabInputError

logger = logging.getLogger(__name__)

LOG_2 = math.log(2.0)
LOG_PI = math.log(math.pi)


# ---- log-domain helpers ----------------------------------------------------

def log_expm1(x: float) -> float:
    """ln(e^x - 1) for x > 0 without overflow"""
    if x <= 0:
        raise LabInputError(f"log_expm1 needs x > 0, got {x}")
    if x > 30.0:
        return x + math.log1p(-math.exp(-x))
    return math.log(math.expm1(x))


def _safe_exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        logger.warning(f"⚠️ exp({x:.3f}) overflows; returning inf")
        return math.inf


def curvature_mass(chi: int) -> float:
    """K = -2 pi chi, the total |curvature| of a hyperbolic metric of area -2 pi chi"""
    return -2.0 * math.pi * chi


# ---- recurrence ------------------------------------------------------------

def log_recurrence_coefficients(E: float, K: float):
    """(ln P, ln Q) with P = e^{EK}, Q = 2(e^{EK} - 1)/K"""
    if E <= 0 or K <= 0:
        raise LabInputError("recurrence needs E > 0 and K > 0")
    ln_P = E * K
    ln_Q = LOG_2 + log_expm1(E * K) - math.log(K)
    return ln_P, ln_Q


def log_recurrence_step(ln_r: float, ln_l: float, E: float, K: float) -> float:
    """ln(P r + Q l); ln_r may be -inf for r = 0"""
    ln_P, ln_Q = log_recurrence_coefficients(E, K)
    return float(logsumexp([ln_P + ln_r, ln_Q + ln_l]))


def recurrence_step(r_i: float, l: float, E: float, K: float) -> float:
    """One radius step r_{i+1} = P r_i + Q l"""
    if r_i < 0 or l <= 0:
        raise LabInputError("recurrence needs r_i >= 0 and l > 0")
    ln_r = math.log(r_i) if r_i > 0 else -math.inf
    return _safe_exp(log_recurrence_step(ln_r, math.log(l), E, K))


def unrolled_log_R_hat(E: float, K: float, steps: int) -> float:
    """ln(r_steps / l) by iterating the recurrence from r_0 = 0, l = 1"""
    ln_r = -math.inf
    for _ in range(steps):
        ln_r = log_recurrence_step(ln_r, 0.0, E, K)
    return ln_r


# ---- area polynomial -------------------------------------------------------

def log_area_polynomial(K: float, iso: float, ln_R_hat: float) -> float:
    """ln R for R = (K/2 + iso K^2) R^2 + (4 iso K + 8 iso) R + 4 iso.

    With iso = 1/(4 pi) and K = -2 pi chi this is the printed
    R = pi(chi^2 - chi) R^2 + (2/pi)(1 - pi chi) R + 1/pi.
    """
    a2 = K / 2.0 + iso * K * K
    a1 = 4.0 * iso * K + 8.0 * iso
    a0 = 4.0 * iso
    return float(logsumexp([math.log(a2) + 2.0 * ln_R_hat, math.log(a1) + ln_R_hat, math.log(a0)]))


def _finish(ln_A: float, ln_R: float):
    ln_C = 0.5 * (ln_A - ln_R)
    return ln_C, _safe_exp(ln_C)


# ---- Theorem variants ------------------------------------------------------

def theorem_log_R_hat(E: float, chi: int) -> float:
    """ln of (e^{2 pi E (chi^2 - 3 chi)} - 1) / (-pi chi)"""
    return log_expm1(2.0 * math.pi * E * (chi * chi - 3 * chi)) - math.log(-math.pi * chi)


def theorem_log_R(ln_R_hat: float, chi: int) -> float:
    terms = [
        math.log(math.pi * (chi * chi - chi)) + 2.0 * ln_R_hat,
        math.log((2.0 / math.pi) * (1.0 - math.pi * chi)) + ln_R_hat,
        -LOG_PI,
    ]
    return float(logsumexp(terms))


def systole_bound_constant(b: BoundInputs, E_provenance: str = "supplied") -> BoundReport:
    """Systole lower bound C = sqrt(A / R) for non-positively curved metrics"""
    K = curvature_mass(b.chi)
    ln_P, ln_Q = log_recurrence_coefficients(b.E, K)
    if b.s == 2 - b.chi:
        ln_R_hat = theorem_log_R_hat(b.E, b.chi)
    else:
        ln_R_hat = LOG_2 - math.log(K) + log_expm1(b.E * K * (b.s + 1))
    ln_R = theorem_log_R(ln_R_hat, b.chi)
    ln_C, C = _finish(math.log(b.A), ln_R)
    steps = [
        f"K = -2 pi chi = {K:.12g}",
        f"ln P = E K = {ln_P:.12g}; ln Q = {ln_Q:.12g}",
        f"s = {b.s}; ln R_hat = {ln_R_hat:.15g}",
        f"ln R = {ln_R:.15g}",
        f"ln C = (ln A - ln R)/2 = {ln_C:.15g}",
    ]
    logger.info(f"✅ nonpositive bound: chi={b.chi} E={b.E} A={b.A:.6g} -> ln C = {ln_C:.6f}")
    return BoundReport(
        theorem=BoundTheorem.NONPOSITIVE, ln_C=ln_C, C=C, ln_R=ln_R, ln_R_hat=ln_R_hat,
        ln_P=ln_P, ln_Q=ln_Q, s=b.s, E=b.E, E_provenance=E_provenance, A=b.A, chi=b.chi,
        steps=steps,
    )


def nofocal_chain(E: float, K1: float, C3: float, iso: float, iterations: int):
    """(ln P1, ln Q1, ln R_hat, ln R) for the no-focal recurrence.

    r_{i+1} <= r_i + (e^{E C3} - 1)/C3 (K1 r_i + 2 l), iterated from r_0 = 0,
    so P1 = 1 + K1 (e^{E C3} - 1)/C3, Q1 = 2 (e^{E C3} - 1)/C3 and
    r_n / l = (2/K1)(P1^n - 1).
    """
    ln_growth = log_expm1(E * C3) - math.log(C3)
    ln_P1 = float(logsumexp([0.0, math.log(K1) + ln_growth]))
    ln_Q1 = LOG_2 + ln_growth
    ln_R_hat = LOG_2 - math.log(K1) + log_expm1(iterations * ln_P1)
    ln_R = log_area_polynomial(K1, iso, ln_R_hat)
    return ln_P1, ln_Q1, ln_R_hat, ln_R


def nofocal_bound_constant(b: BoundInputs, E_provenance: str = "supplied") -> BoundReport:
    """Systole lower bound for metrics without focal points and small positive curvature"""
    two_pi = 2.0 * math.pi
    if b.eps <= 0:
        raise LabInputError("eps must be positive; the no-focal bound degenerates at eps = 0")
    if b.eps >= two_pi:
        raise LabInputError("eps must be smaller than 2 pi")
    if b.Cpos >= two_pi - b.eps:
        raise LabInputError(f"Cpos = {b.Cpos} violates Cpos < 2 pi - eps = {two_pi - b.eps}")
    K = curvature_mass(b.chi)
    K1 = K + two_pi - b.eps
    C3 = K + K1 + two_pi - b.eps
    iso = 1.0 / (2.0 * b.eps)
    iterations = b.s + 1
    ln_P1, ln_Q1, ln_R_hat, ln_R = nofocal_chain(b.E, K1, C3, iso, iterations)
    ln_C, C = _finish(math.log(b.A), ln_R)
    steps = [
        f"K1 = -2 pi chi + 2 pi - eps = {K1:.12g}",
        f"C3 = -2 pi chi + K1 + 2 pi - eps = {C3:.12g}",
        f"ln P1 = ln(1 + K1 (e^(E C3) - 1)/C3) = {ln_P1:.15g}",
        f"ln Q1 = ln(2 (e^(E C3) - 1)/C3) = {ln_Q1:.15g}",
        f"iterations = s + 1 = {iterations}; ln R_hat = ln((2/K1)(P1^n - 1)) = {ln_R_hat:.15g}",
        f"isoperimetric constant 1/(2 eps) = {iso:.12g}",
        f"ln R = {ln_R:.15g}",
        f"ln C = (ln A - ln R)/2 = {ln_C:.15g}",
    ]
    logger.info(f"✅ nofocal bound: chi={b.chi} eps={b.eps} E={b.E} -> ln C = {ln_C:.6f}")
    return BoundReport(
        theorem=BoundTheorem.NOFOCAL, ln_C=ln_C, C=C, ln_R=ln_R, ln_R_hat=ln_R_hat,
        ln_P=ln_P1, ln_Q=ln_Q1, s=b.s, E=b.E, E_provenance=E_provenance, A=b.A, chi=b.chi,
        eps=b.eps, ln_K1=math.log(K1), ln_C3=math.log(C3), steps=steps,
    )


def bound_for(b: BoundInputs, theorem: BoundTheorem = BoundTheorem.NONPOSITIVE,
              E_provenance: str = "supplied") -> BoundReport:
    if theorem == BoundTheorem.NOFOCAL:
        return nofocal_bound_constant(b, E_provenance)
    return systole_bound_constant(b, E_provenance)


def entropy_bound_report(b: BoundInputs, sabourau_C: float,
                         theorem: BoundTheorem = BoundTheorem.NONPOSITIVE) -> EntropyBoundReport:
    """B = sabourau_C / C, the entropy ceiling implied by sys * h <= sabourau_C"""
    if not sabourau_C > 0:
        raise LabInputError("sabourau_C must be positive")
    report = bound_for(b, theorem)
    ln_B = math.log(sabourau_C) - report.ln_C
    return EntropyBoundReport(theorem=theorem, sabourau_C=sabourau_C, ln_C=report.ln_C,
                              ln_B=ln_B, B=_safe_exp(ln_B))

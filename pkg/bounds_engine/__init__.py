# ============================================================================
# bounds_engine/__init__.py - Explicit systole constants and their verification
# ============================================================================

from .constants import (
    recurrence_step,
    log_recurrence_step,
    log_recurrence_coefficients,
    unrolled_log_R_hat,
    log_area_polynomial,
    systole_bound_constant,
    nofocal_bound_constant,
    nofocal_chain,
    bound_for,
    entropy_bound_report,
    curvature_mass,
)

from .verification import (
    verify_systole_bound,
    require_all_pass,
)

__all__ = [
    'recurrence_step',
    'log_recurrence_step',
    'log_recurrence_coefficients',
    'unrolled_log_R_hat',
    'log_area_polynomial',
    'systole_bound_constant',
    'nofocal_bound_constant',
    'nofocal_chain',
    'bound_for',
    'entropy_bound_report',
    'curvature_mass',
    'verify_systole_bound',
    'require_all_pass',
]

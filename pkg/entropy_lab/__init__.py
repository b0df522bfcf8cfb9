# ============================================================================
# entropy_lab/__init__.py - Metric and topological entropy of the geodesic flow
# ============================================================================

from .sampling import (
    liouville_sample,
    liouville_arrays,
)

from .riccati import (
    metric_entropy_estimate,
    lyapunov_vs_jacobi_check,
    riccati_rhs,
    ENTROPY_DT,
)

from .counting import (
    topological_entropy_counting,
    entropy_from_count,
    li_inverse,
    uniform_exponent,
)

from .report import (
    entropy_order_report,
    order_from_estimates,
    counting_length,
    sabourau_product,
    area_entropy,
    has_constant_curvature,
)

__all__ = [
    'liouville_sample',
    'liouville_arrays',
    'metric_entropy_estimate',
    'lyapunov_vs_jacobi_check',
    'riccati_rhs',
    'ENTROPY_DT',
    'topological_entropy_counting',
    'entropy_from_count',
    'li_inverse',
    'uniform_exponent',
    'entropy_order_report',
    'order_from_estimates',
    'counting_length',
    'sabourau_product',
    'area_entropy',
    'has_constant_curvature',
]

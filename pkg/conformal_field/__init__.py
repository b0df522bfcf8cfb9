# ============================================================================
# conformal_field/__init__.py - Conformal metrics, curvature, cone metrics
# ============================================================================

from .grid import (
    SurfaceGrid,
    build_surface_grid,
    build_chart_grid,
    cached_surface_grid,
    cached_chart_grid,
)

from .smoothing import (
    SmoothingPatch,
    psi,
    psi_prime,
    psi_second,
    smoothing_constant,
    smoothing_radius,
)

from .field import (
    ConePrescription,
    CurvatureField,
    MetricField,
    cone_template,
    gaussian_curvature,
    gauss_bonnet_defect,
    laplacian_sigma,
    normalize_area,
    total_area,
)

from .cone import (
    solve_flat_cone_metric,
    solve_cone_metric_curvature,
)

from .families import (
    hyperbolic_field,
    random_bump_field,
    single_bump_field,
    flat_cone_field,
    eps_curved_field,
    smoothing_family,
    smoothing_profile,
    smoothing_corpus,
    model_chart_field,
    constant_chart_field,
)

from .isoperimetric import (
    DiskRegion,
    IsoperimetricResult,
    PolygonRegion,
    isoperimetric_check,
)

from .storage import (
    save_field,
    load_field,
    file_digest,
)

__all__ = [
    'SurfaceGrid',
    'build_surface_grid',
    'build_chart_grid',
    'cached_surface_grid',
    'cached_chart_grid',
    'SmoothingPatch',
    'psi',
    'psi_prime',
    'psi_second',
    'smoothing_constant',
    'smoothing_radius',
    'ConePrescription',
    'CurvatureField',
    'MetricField',
    'cone_template',
    'gaussian_curvature',
    'gauss_bonnet_defect',
    'laplacian_sigma',
    'normalize_area',
    'total_area',
    'solve_flat_cone_metric',
    'solve_cone_metric_curvature',
    'hyperbolic_field',
    'random_bump_field',
    'single_bump_field',
    'flat_cone_field',
    'eps_curved_field',
    'smoothing_family',
    'smoothing_profile',
    'smoothing_corpus',
    'model_chart_field',
    'constant_chart_field',
    'DiskRegion',
    'IsoperimetricResult',
    'PolygonRegion',
    'isoperimetric_check',
    'save_field',
    'load_field',
    'file_digest',
]

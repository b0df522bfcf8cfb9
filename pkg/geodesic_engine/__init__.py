# ============================================================================
# geodesic_engine/__init__.py - Geodesic flow, closed geodesics, systole
# ============================================================================

from .flow import (
    TangentState,
    GeodesicTrace,
    GeodesicFlow,
    FlowResult,
    integrate_geodesic,
    unit_state,
    g_speed,
)

from .loops import (
    ClosedGeodesic,
    loop_length,
    shorten_loop,
    initial_polyline,
    reparametrize,
    save_geodesic,
    load_geodesic,
)

from .intersections import (
    IntersectionResult,
    intersection_number,
    self_intersection_number,
    chord_crossings,
    sigma_intersection,
    is_simple_class,
)

from .systole import (
    systole,
    systole_search,
    candidate_classes,
)

from .probes import (
    ProbeTable,
    thick_thin_probe,
    collar_probe,
)

__all__ = [
    'TangentState',
    'GeodesicTrace',
    'GeodesicFlow',
    'FlowResult',
    'integrate_geodesic',
    'unit_state',
    'g_speed',
    'ClosedGeodesic',
    'loop_length',
    'shorten_loop',
    'initial_polyline',
    'reparametrize',
    'save_geodesic',
    'load_geodesic',
    'IntersectionResult',
    'intersection_number',
    'self_intersection_number',
    'chord_crossings',
    'sigma_intersection',
    'is_simple_class',
    'systole',
    'systole_search',
    'candidate_classes',
    'ProbeTable',
    'thick_thin_probe',
    'collar_probe',
]

# ============================================================================
# surface_atlas/__init__.py - Bolza surface: octagon, deck group, classes
# ============================================================================

from .isometry import (
    DiskIsometry,
    translation_length,
    disk_distance,
    distance_between_geodesics,
)

from .octagon import (
    FundamentalOctagon,
    SurfacePoint,
    build_bolza_atlas,
    canonicalize,
    inverse_index,
    CHI,
    SYSTOLE,
    INRADIUS,
    CIRCUMRADIUS,
    VERTEX_RADIUS,
    MIDPOINT_RADIUS,
    RELATION_WORD,
)

from .words import (
    GroupWord,
    word_to_isometry,
    enumerate_classes,
    canonical_form,
    cyclic_reduce,
    cyclically_reduced_count,
)

from .classes import (
    ChordDecomposition,
    GeodesicClass,
    chord_walk,
    distinct_geodesic_classes,
    neighbor_tiles,
    orbit_ball,
    word_axis_polyline,
    lift_through_domain,
    closest_point_to_origin,
    point_on_axis,
    chord_crossings,
    classes_up_to_length,
)

__all__ = [
    'DiskIsometry',
    'translation_length',
    'disk_distance',
    'distance_between_geodesics',
    'FundamentalOctagon',
    'SurfacePoint',
    'build_bolza_atlas',
    'canonicalize',
    'inverse_index',
    'CHI',
    'SYSTOLE',
    'INRADIUS',
    'CIRCUMRADIUS',
    'VERTEX_RADIUS',
    'MIDPOINT_RADIUS',
    'RELATION_WORD',
    'GroupWord',
    'word_to_isometry',
    'enumerate_classes',
    'canonical_form',
    'cyclic_reduce',
    'cyclically_reduced_count',
    'ChordDecomposition',
    'GeodesicClass',
    'chord_walk',
    'distinct_geodesic_classes',
    'neighbor_tiles',
    'orbit_ball',
    'word_axis_polyline',
    'lift_through_domain',
    'closest_point_to_origin',
    'point_on_axis',
    'chord_crossings',
    'classes_up_to_length',
]

# ============================================================================
# conformal_modulus/__init__.py - Annulus moduli, modulus bounds, E(sigma)
# ============================================================================

from .annulus import (
    AnnulusRegion,
    annulus_from_dict,
    flat_cylinder,
    round_annulus,
    collar_annulus,
    collar_modulus,
    maximal_collar_width,
    standard_collar_width,
)

from .solver import (
    modulus_dirichlet,
    modulus_flat,
)

from .bounds import (
    EInterval,
    estimate_E,
    modulus_lower_bound_nonpositive,
    modulus_lower_bound_nofocal,
    nofocal_modulus_constant,
)

__all__ = [
    'AnnulusRegion',
    'annulus_from_dict',
    'flat_cylinder',
    'round_annulus',
    'collar_annulus',
    'collar_modulus',
    'maximal_collar_width',
    'standard_collar_width',
    'modulus_dirichlet',
    'modulus_flat',
    'EInterval',
    'estimate_E',
    'modulus_lower_bound_nonpositive',
    'modulus_lower_bound_nofocal',
    'nofocal_modulus_constant',
]

"""Twisted conjugation on compact simple Lie groups.

Orbit root systems and twisted Weyl groups of diagram automorphisms,
twining characters, volumes of twisted conjugacy classes, and
Duistermaat-Heckman measures of twisted moduli spaces of flat connections,
together with brute-force matrix and Monte Carlo references.
"""

from .characters import (
    CharacterContext,
    TwiningCharacter,
    fixed_dominant_weights,
    gram_matrix,
    inner_product,
    twining_character,
    weyl_character,
)
from .measures import ClassData, VolumeExpr, class_volume, twisted_det_factor
from .moduli import (
    SurfaceSpec,
    dh_coefficient,
    dh_coefficient_table,
    dh_density,
    fuse_coefficients,
    reduced_volume,
)
from .rootsystem import RootSystem, TorusPoint, build_root_system, weyl_dimension
from .twist import Twist, make_twist, named_twist, orbit_root_system, twisted_weyl_group

__version__ = "0.1.0"

__all__ = [
    "CharacterContext",
    "ClassData",
    "RootSystem",
    "SurfaceSpec",
    "TorusPoint",
    "Twist",
    "TwiningCharacter",
    "VolumeExpr",
    "build_root_system",
    "class_volume",
    "dh_coefficient",
    "dh_coefficient_table",
    "dh_density",
    "fixed_dominant_weights",
    "fuse_coefficients",
    "gram_matrix",
    "inner_product",
    "make_twist",
    "named_twist",
    "orbit_root_system",
    "reduced_volume",
    "twining_character",
    "twisted_det_factor",
    "twisted_weyl_group",
    "weyl_character",
    "weyl_dimension",
]

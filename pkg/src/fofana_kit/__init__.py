"""Grid-based amalgam, Fofana and generalized Morrey norms with a maximal-operator test harness."""

__version__ = "0.1.0"

from .exponents import ExponentPair, parse_exponent
from .grids import RadiusGrid
from .lattice import Ball, FunctionSpec, GridFunction, Lattice, make_lattice, sample
from .maximal import MaximalConfig, maximal_function
from .norms import (
    amalgam_continuous,
    amalgam_discrete,
    fofana_norm,
    generalized_fofana_norm,
    lebesgue_norm,
    morrey_norm,
)
from .report import CheckReport
from .weights import WeightFunction, check_class, check_doubling, nakai_constant

__all__ = [
    "Ball",
    "CheckReport",
    "ExponentPair",
    "FunctionSpec",
    "GridFunction",
    "Lattice",
    "MaximalConfig",
    "RadiusGrid",
    "WeightFunction",
    "amalgam_continuous",
    "amalgam_discrete",
    "check_class",
    "check_doubling",
    "fofana_norm",
    "generalized_fofana_norm",
    "lebesgue_norm",
    "make_lattice",
    "maximal_function",
    "morrey_norm",
    "nakai_constant",
    "parse_exponent",
    "sample",
]

"""Finite residuated lattices, poset products and their relational semantics."""

__version__ = "0.1.0"

from .algebra import (
    FiniteResiduatedLattice,
    check_equation,
    classify,
    direct_product,
    lukasiewicz_chain,
    morphism_search,
    validate_algebra,
)
from .errors import ConsistencyError, FormatError, PreconditionError, SizeError, UnsupportedError
from .poset_product import Frame, build_poset_product
from .posets import FinitePoset, validate_poset
from .semantics import countermodel_search, forces, frame_valid
from .structure import represent_finite_gbl
from .syntax import parse, render

__all__ = [
    "ConsistencyError",
    "FiniteResiduatedLattice",
    "FinitePoset",
    "FormatError",
    "Frame",
    "PreconditionError",
    "SizeError",
    "UnsupportedError",
    "build_poset_product",
    "check_equation",
    "classify",
    "countermodel_search",
    "direct_product",
    "forces",
    "frame_valid",
    "lukasiewicz_chain",
    "morphism_search",
    "parse",
    "render",
    "represent_finite_gbl",
    "validate_algebra",
    "validate_poset",
]

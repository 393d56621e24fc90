"""Numerical primary decomposition of polynomial ideals.

Deflation ideals, truncated dual spaces, homotopy continuation, numerical
irreducible decomposition and the driver that combines them into witness
sets for isolated and embedded components plus an ideal membership test.

The drivers live in the submodules of the same name: ``numprimdec.nid.nid``
and ``numprimdec.npd.npd``.
"""

from .deflation import DeflatedSystem, DeflationMatrix, ambient_dim, deflate_ideal, deflation_matrix, deflation_matrix_at
from .dualspace import DualFunctional, DualSpaceBasis, multiplicity, truncated_dual_space
from .nid import WitnessSet, is_in_component
from .npd import ComponentRecord, MembershipReport, NPDResult, ideal_membership, sample_component, visible_components
from .polycore import Polynomial, PolySystem, VariableList, parse, parse_polynomial, to_text
from .tracker import SlicingPlane, TrackerConfig

__all__ = [
    "ComponentRecord",
    "DeflatedSystem",
    "DeflationMatrix",
    "DualFunctional",
    "DualSpaceBasis",
    "MembershipReport",
    "NPDResult",
    "Polynomial",
    "PolySystem",
    "SlicingPlane",
    "TrackerConfig",
    "VariableList",
    "WitnessSet",
    "ambient_dim",
    "deflate_ideal",
    "deflation_matrix",
    "deflation_matrix_at",
    "ideal_membership",
    "is_in_component",
    "multiplicity",
    "parse",
    "parse_polynomial",
    "sample_component",
    "to_text",
    "truncated_dual_space",
    "visible_components",
]

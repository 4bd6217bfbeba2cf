"""Finite inverse-sequence decompositions of representable compact groups and
binary closed subbases built along them, checked with exact arithmetic."""

from .circle import Arc, ArcSet, Turn, arc_intersect, arc_preimage, branch_preimages, power_map
from .extend import ExtensionReport, extend_along, extend_local_homeo, extend_product, mills_pipeline
from .groups import FiniteGroup, GroupHom, Subgroup, kernel, normal_subgroups, quotient, resolve_finite, validate_group
from .invseq import BondingMap, InverseSeq, composite_projection, profinite_sequence, solenoid_sequence
from .presentations import Presentation, build_sequence, decompose_presentation
from .spaces import CIRCLE, POINT, Circle, Discrete, Product
from .subbase import Cover, SubbaseFamily, close_under_intersection, is_binary, star_refine, subbase_criterion

__version__ = "0.1.0"

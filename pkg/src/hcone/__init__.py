"""Minimal cones in the first Heisenberg group built from arcs of the unit circle."""

from hcone.arcs import Arc, ArcFamily, GeometricTail, is_covering, locate, validate
from hcone.cone import ConeSurface, classify, evaluate, gradient, is_c1
from hcone.errors import HconeError

__all__ = [
    "Arc",
    "ArcFamily",
    "ConeSurface",
    "GeometricTail",
    "HconeError",
    "classify",
    "evaluate",
    "gradient",
    "is_c1",
    "is_covering",
    "locate",
    "validate",
]

__version__ = "0.1.0"

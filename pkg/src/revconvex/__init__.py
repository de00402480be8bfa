"""Valid inequalities and disjunctions for a polyhedron minus an open convex set."""

from .classify import classify_rays, check_assumption1, check_assumption2
from .convexbody import Ball, ConvexQuadratic, MinkowskiSumWithCone, SecondOrderBody, StrictHalfspaces
from .instance import Instance, load_instance, load_fixture, parse_instance

__version__ = "0.1.0"

__all__ = [
    "Ball",
    "ConvexQuadratic",
    "Instance",
    "MinkowskiSumWithCone",
    "SecondOrderBody",
    "StrictHalfspaces",
    "check_assumption1",
    "check_assumption2",
    "classify_rays",
    "load_fixture",
    "load_instance",
    "parse_instance",
]

"""Intersection cuts from basic solutions, inside or outside the convex set."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .classify import INSIDE, OUTSIDE, RayClassification, check_assumption1
from .convexbody import PreconditionError
from .numkernel import feasible_point
from .polyhedron import LinearCut, LiftingError, lift_cut


class ValidityError(ValueError):
    """The disjunction would not cover P^B minus C; carries the offending ray."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


def _recip(v: np.ndarray) -> np.ndarray:
    """1/v with 1/(+-inf) = 0."""
    out = np.zeros_like(v, dtype=float)
    fin = np.isfinite(v)
    out[fin] = 1.0 / v[fin]
    return out


def standard_intersection_cut(cls: RayClassification) -> LinearCut:
    if cls.apex != INSIDE:
        raise PreconditionError(f"apex is {cls.apex}; the standard cut needs it inside C")
    coef = _recip(cls.lambda2)
    return LinearCut(coef, ">=", 1.0, note=f"standard intersection cut, basis {_basis_tag(cls)}")


def _basis_tag(cls: RayClassification) -> str:
    B = cls.cone.basis
    return "cone-only" if B is None else "{" + ",".join(str(j + 1) for j in B.B) + "}"


@dataclass(frozen=True)
class SideStatus:
    state: str = "unknown"  # unknown | empty | nonempty
    witness: Optional[np.ndarray] = None
    certificate: Optional[np.ndarray] = None
    symbolic: bool = False


@dataclass(frozen=True)
class TwoTermDisjunction:
    left: LinearCut
    right: LinearCut
    left_status: SideStatus = field(default_factory=SideStatus)
    right_status: SideStatus = field(default_factory=SideStatus)

    def covers(self, u, tol: float = 1e-7) -> np.ndarray:
        """True where a nonbasic-space point satisfies at least one side."""
        return self.left.satisfied(u, tol) | self.right.satisfied(u, tol)


def two_term_disjunction(cls: RayClassification, check: bool = True) -> TwoTermDisjunction:
    """Either sum x_j/lambda1_j <= 1 or sum x_j/lambda2_j >= 1 on P^B minus C."""
    if cls.apex != OUTSIDE:
        raise PreconditionError(f"apex is {cls.apex}; the two-term disjunction needs it outside cl(C)")
    if check:
        a1 = check_assumption1(cls)
        if not a1:
            raise ValidityError(a1.detail, a1.witness)
    tag = _basis_tag(cls)
    left = LinearCut(_recip(cls.lambda1), "<=", 1.0, note=f"two-term left side, basis {tag}")
    right = LinearCut(_recip(cls.lambda2), ">=", 1.0, note=f"two-term right side, basis {tag}")
    return TwoTermDisjunction(left, right)


def side_status(cls: RayClassification, cut: LinearCut) -> SideStatus:
    """Decide whether {x in P : cut} is empty, symbolically when the cut is constant."""
    if cut.trivial:
        holds = (0.0 <= cut.rhs) if cut.sense == "<=" else (0.0 >= cut.rhs)
        if not holds:
            return SideStatus("empty", symbolic=True)
    sys = cls.cone.standard_system()
    a, b = cut.as_le()
    row = cls.cone.embed(a)
    res = feasible_point(
        np.vstack([sys.A_ub, row]), np.append(sys.b_ub, b), sys.A_eq if len(sys.A_eq) else None,
        sys.b_eq if len(sys.A_eq) else None, lower=sys.lower, n=sys.n,
    )
    if res.feasible:
        return SideStatus("nonempty", witness=res.point)
    return SideStatus("empty", certificate=res.certificate)


def with_emptiness(cls: RayClassification, disj: TwoTermDisjunction) -> TwoTermDisjunction:
    return replace(disj, left_status=side_status(cls, disj.left), right_status=side_status(cls, disj.right))


@dataclass(frozen=True)
class ExternalCutResult:
    disjunction: TwoTermDisjunction
    cut: Optional[LinearCut] = None  # nonbasic space
    lifted: Optional[LinearCut] = None  # original space
    side: Optional[str] = None
    region_empty: bool = False
    reason: str = ""


def external_intersection_cut(
    cls: RayClassification, disj: Optional[TwoTermDisjunction] = None
) -> ExternalCutResult:
    if disj is None:
        disj = two_term_disjunction(cls)
    disj = with_emptiness(cls, disj)
    le, re = disj.left_status.state == "empty", disj.right_status.state == "empty"
    if le and re:
        return ExternalCutResult(disj, region_empty=True, reason="both sides are empty against P")
    if not le and not re:
        return ExternalCutResult(disj, reason="both sides meet P; this is an intersection disjunction")
    side, cut = ("right", disj.right) if le else ("left", disj.left)
    cut = replace(cut, note=f"external intersection cut ({side} side), basis {_basis_tag(cls)}")
    try:
        lifted = lift_cut(cut, cls.cone)
    except LiftingError as exc:
        return ExternalCutResult(disj, cut, None, side, reason=str(exc))
    return ExternalCutResult(disj, cut, lifted, side)

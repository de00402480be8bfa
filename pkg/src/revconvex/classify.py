"""Entry/exit parameters along cone rays, the three-way partition, and assumption checks."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .convexbody import (
    INF,
    STRICT_TOL,
    CapabilityError,
    ConeOracle,
    ConvexBody,
    ExtendedInterval,
    EMPTY_INTERVAL,
    OracleError,
)
from .numkernel import LpProblem, lp_solve
from .polyhedron import SimplicialCone

N0, N1, N2 = "N0", "N1", "N2"
OUTSIDE, BOUNDARY, INSIDE = "outside_closure", "on_boundary", "inside"


@dataclass(frozen=True, eq=False)
class RayClassification:
    """Per-ray (lambda1, lambda2) with tags; positions index ``cone.nonbasic``."""

    lambda1: np.ndarray
    lambda2: np.ndarray
    tags: tuple
    apex: str
    cone: SimplicialCone
    body: ConvexBody

    def positions(self, tag: str) -> tuple:
        return tuple(i for i, t in enumerate(self.tags) if t == tag)

    @property
    def N0(self) -> tuple:
        return self.positions(N0)

    @property
    def N1(self) -> tuple:
        return self.positions(N1)

    @property
    def N2(self) -> tuple:
        return self.positions(N2)

    @property
    def size(self) -> int:
        return len(self.tags)

    def ray(self, j: int) -> np.ndarray:
        return self.cone.rays_y[:, j]

    def table(self) -> list[dict]:
        return [
            {
                "column": self.cone.label(j),
                "lambda1": float(self.lambda1[j]),
                "lambda2": float(self.lambda2[j]),
                "class": self.tags[j],
            }
            for j in range(self.size)
        ]


def apex_location(body: ConvexBody, x, margin: float = STRICT_TOL) -> str:
    lv = body.level(x)
    if lv < -margin:
        return INSIDE
    if lv <= margin:
        return BOUNDARY
    return OUTSIDE


def classify_rays(
    cone: SimplicialCone, body: ConvexBody, margin: float = STRICT_TOL
) -> RayClassification:
    apex = cone.apex_y
    where = apex_location(body, apex, margin)
    rays = cone.rays_y
    n = cone.size
    lam1 = np.full(n, INF)
    lam2 = np.full(n, -INF)
    tags = []
    for j in range(n):
        iv = body.ray_interval(apex, rays[:, j])
        lo, hi = iv
        if iv.empty:
            tags.append(N0)
            continue
        if not math.isfinite(lo):
            raise OracleError(f"ray {j}: infinite entry with exit {hi}")
        if where == INSIDE:
            lo = 0.0
        lam1[j], lam2[j] = lo, hi
        tags.append(N1 if hi == INF else N2)
    return RayClassification(lam1, lam2, tuple(tags), where, cone, body)


@dataclass(frozen=True)
class AssumptionCheck:
    holds: bool
    witness: Optional[object] = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.holds


def check_assumption1(cls: RayClassification, body: Optional[ConvexBody] = None) -> AssumptionCheck:
    """Every ray that misses the body must be a recession direction of it."""
    missing = cls.N0
    if not missing:
        return AssumptionCheck(True)
    K = (body or cls.body).recession_cone()
    for j in missing:
        if not K.member(cls.ray(j)):
            return AssumptionCheck(False, j, f"ray of column {cls.cone.label(j)} misses C and is not in recc(C)")
    return AssumptionCheck(True)


def _ray_inverse(rays: np.ndarray):
    """Return (W, Z): cone(rays) = {d : W d >= 0, Z d = 0} for independent rays."""
    n, k = rays.shape
    if k and np.linalg.matrix_rank(rays) < k:
        raise CapabilityError("cone rays are linearly dependent")
    W = np.linalg.pinv(rays) if k else np.zeros((0, n))
    if k:
        U, _, _ = np.linalg.svd(rays, full_matrices=True)
        Z = U[:, k:].T
    else:
        Z = np.eye(n)
    return W, Z


def _extreme_value(K: ConeOracle, w: np.ndarray, maximize: bool) -> tuple[float, np.ndarray]:
    """Optimize w @ d over K intersected with the unit box."""
    D, A_ub, A_eq, lower = K.parametrization()
    nv = D.shape[1]
    n = K.dim
    # box |D v|_inf <= 1 keeps the LP bounded
    A_box = np.vstack([D, -D])
    prob = LpProblem.build(
        w @ D,
        np.vstack([A_ub, A_box]) if nv else None,
        np.concatenate([np.zeros(len(A_ub)), np.ones(2 * n)]) if nv else None,
        A_eq if len(A_eq) else None,
        np.zeros(len(A_eq)) if len(A_eq) else None,
        lower=lower,
        maximize=maximize,
    )
    out = lp_solve(prob)
    if not out.optimal:
        raise OracleError(f"cone extreme-value LP ended {out.status}")
    return float(out.objective), D @ out.x


def check_assumption2(cone: SimplicialCone, body: ConvexBody, tol: float = 1e-7) -> AssumptionCheck:
    """recc(C) must sit inside the recession cone of the simplicial cone."""
    K = body.recession_cone()
    W, Z = _ray_inverse(cone.rays_y)
    if K.kind == "trivial":
        return AssumptionCheck(True)
    if K.kind == "generators":
        for g in K.generators:
            if np.any(np.abs(Z @ g) > tol * max(1.0, np.abs(g).max())) or np.any(W @ g < -tol * max(1.0, np.abs(g).max())):
                return AssumptionCheck(False, g, "generator of recc(C) leaves the cone")
        return AssumptionCheck(True)
    for row in W:
        val, d = _extreme_value(K, row, maximize=False)
        if val < -tol:
            return AssumptionCheck(False, d, "recc(C) direction with a negative ray coordinate")
    for row in Z:
        for sense in (False, True):
            val, d = _extreme_value(K, row, maximize=sense)
            if abs(val) > tol:
                return AssumptionCheck(False, d, "recc(C) direction outside the span of the rays")
    return AssumptionCheck(True)


@dataclass(frozen=True, eq=False)
class ConeRestrictedBody(ConvexBody):
    """C intersected with the interior of the simplicial cone.

    Substituting this set for C makes the containment of recession cones
    hold by construction.  Its recession cone is only available when recc(C)
    has a halfspace description.
    """

    body: ConvexBody
    cone: SimplicialCone
    interior_hint: Optional[np.ndarray] = None

    @property
    def dim(self) -> int:
        return self.body.dim

    def _coords(self, x) -> np.ndarray:
        W, _ = _ray_inverse(self.cone.rays_y)
        return W @ (np.asarray(x, dtype=float) - self.cone.apex_y)

    def level(self, x) -> float:
        u = self._coords(x)
        scale = np.linalg.norm(np.linalg.pinv(self.cone.rays_y), axis=1)
        cone_level = float(np.max(-u / scale, initial=-INF))
        return max(self.body.level(x), cone_level)

    def recession_cone(self) -> ConeOracle:
        K = self.body.recession_cone()
        W, Z = _ray_inverse(self.cone.rays_y)
        if K.kind == "trivial":
            return K
        if K.kind != "halfspaces":
            raise CapabilityError("cone intersection needs a halfspace description of recc(C)")
        return ConeOracle.from_halfspaces(np.vstack([K.ineqs, -W]), np.vstack([K.eqs, Z]), dim=self.dim)

    def ray_interval(self, origin, direction) -> ExtendedInterval:
        lo, hi = self.body.ray_interval(origin, direction)
        if lo == INF:
            return EMPTY_INTERVAL
        # the cone is polyhedral: clip by its own ratio test
        u0 = self._coords(origin)
        du = self._coords(np.asarray(origin, dtype=float) + np.asarray(direction, dtype=float)) - u0
        for a, b in zip(u0, du):
            if b > 0:
                lo = max(lo, -a / b)
            elif b < 0:
                hi = min(hi, -a / b)
            elif a <= 0:
                return EMPTY_INTERVAL
        if lo >= hi:
            return EMPTY_INTERVAL
        return ExtendedInterval(lo, hi)

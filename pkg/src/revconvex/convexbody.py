"""Oracles for open convex sets and closed polyhedral cones.

Bodies answer three questions: is a point inside, where does a ray enter and
leave, and what is the recession cone.  Cones answer membership and the
line supremum  sup{g >= 0 : u + g w in K}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import nnls

from .numkernel import LpProblem, lp_solve

STRICT_TOL = 1e-9
INTERVAL_TOL = 1e-9
LAMBDA_MAX = 1e8
PSD_TOL = 1e-9

INF = math.inf


class OracleError(Exception):
    """A ray query could not be resolved to a trustworthy answer."""


class CapabilityError(Exception):
    """The requested operation is not available for this representation."""


class PreconditionError(ValueError):
    pass


def _vec(x) -> np.ndarray:
    return np.asarray(x, dtype=float).ravel()


def _rows(a, dim: int) -> np.ndarray:
    if a is None:
        return np.zeros((0, dim))
    a = np.asarray(a, dtype=float)
    return a.reshape(-1, dim) if a.size else np.zeros((0, dim))


# ---------------------------------------------------------------------------
# Cones


@dataclass(frozen=True)
class ExtendedInterval:
    lo: float
    hi: float

    @property
    def empty(self) -> bool:
        return self.lo == INF and self.hi == -INF

    def __iter__(self):
        return iter((self.lo, self.hi))


EMPTY_INTERVAL = ExtendedInterval(INF, -INF)


@dataclass(frozen=True, eq=False)
class ConeOracle:
    """K = cone(generators) + {d : ineqs @ d <= 0, eqs @ d = 0}.

    When ``outer`` is False the polyhedral part is absent and K is the conic
    hull of the generators alone ({0} when there are none).  Kinds:
    ``generators`` (no outer part), ``halfspaces`` (no generators),
    ``trivial`` and ``sum``.
    """

    dim: int
    generators: np.ndarray
    ineqs: np.ndarray
    eqs: np.ndarray
    outer: bool
    tol: float = 1e-7

    @classmethod
    def from_generators(cls, gens, dim: Optional[int] = None) -> "ConeOracle":
        g = np.asarray(gens, dtype=float)
        if dim is None:
            dim = g.shape[-1]
        return cls(dim, _rows(g, dim), np.zeros((0, dim)), np.zeros((0, dim)), False)

    @classmethod
    def from_halfspaces(cls, ineqs=None, eqs=None, dim: Optional[int] = None) -> "ConeOracle":
        if dim is None:
            src = ineqs if ineqs is not None and np.size(ineqs) else eqs
            dim = np.asarray(src, dtype=float).shape[-1]
        return cls(dim, np.zeros((0, dim)), _rows(ineqs, dim), _rows(eqs, dim), True)

    @classmethod
    def trivial(cls, dim: int) -> "ConeOracle":
        z = np.zeros((0, dim))
        return cls(dim, z, z, z, False)

    @property
    def kind(self) -> str:
        if not self.outer:
            return "generators" if len(self.generators) else "trivial"
        return "sum" if len(self.generators) else "halfspaces"

    def plus(self, extra_gens) -> "ConeOracle":
        """Minkowski sum with cone(extra_gens)."""
        g = np.vstack([self.generators, _rows(extra_gens, self.dim)])
        return ConeOracle(self.dim, g, self.ineqs, self.eqs, self.outer, self.tol)

    def parametrization(self):
        """(D, A_ub, A_eq, lower) with K = {D v : A_ub v <= 0, A_eq v = 0, v >= lower}.

        The variables are q (free, only when there is an outer part) followed
        by one nonnegative multiplier per generator.  Callers embed these rows
        in larger LPs wherever a cone term appears.
        """
        n, k = self.dim, len(self.generators)
        nq = n if self.outer else 0
        D = np.hstack([np.eye(n)[:, :nq], self.generators.T.reshape(n, k)])
        pad = lambda rows: np.hstack([rows, np.zeros((rows.shape[0], k))]) if nq else np.zeros((0, k))
        A_ub = pad(self.ineqs) if len(self.ineqs) else np.zeros((0, nq + k))
        A_eq = pad(self.eqs) if len(self.eqs) else np.zeros((0, nq + k))
        lower = np.concatenate([np.full(nq, -INF), np.zeros(k)])
        return D, A_ub, A_eq, lower

    # -- helpers -------------------------------------------------------------

    def _decomposition_lp(self, target: np.ndarray, extra: Optional[np.ndarray] = None, maximize_extra=False):
        """LP over (mu >= 0, q free[, g >= 0]) with  G^T mu + q - g*extra = target."""
        n = self.dim
        k = len(self.generators)
        nq = n if self.outer else 0
        ng = 1 if extra is not None else 0
        nv = k + nq + ng
        A_eq = np.zeros((n, nv))
        A_eq[:, :k] = self.generators.T
        if nq:
            A_eq[:, k : k + n] = np.eye(n)
        if ng:
            A_eq[:, -1] = -extra
        ub_rows, eq_rows = [], [A_eq]
        b_eq = [target]
        if nq and len(self.ineqs):
            blk = np.zeros((len(self.ineqs), nv))
            blk[:, k : k + n] = self.ineqs
            ub_rows.append(blk)
        if nq and len(self.eqs):
            blk = np.zeros((len(self.eqs), nv))
            blk[:, k : k + n] = self.eqs
            eq_rows.append(blk)
            b_eq.append(np.zeros(len(self.eqs)))
        lower = np.zeros(nv)
        lower[k : k + nq] = -INF
        c = np.zeros(nv)
        if ng:
            c[-1] = 1.0
        A_ub = np.vstack(ub_rows) if ub_rows else None
        b_ub = np.zeros(A_ub.shape[0]) if A_ub is not None else None
        prob = LpProblem.build(
            c, A_ub, b_ub, np.vstack(eq_rows), np.concatenate(b_eq), lower=lower, maximize=maximize_extra
        )
        return lp_solve(prob)

    # -- queries -------------------------------------------------------------

    def member(self, d) -> bool:
        d = _vec(d)
        scale = max(1.0, float(np.abs(d).max(initial=0.0)))
        if self.kind == "trivial":
            return bool(np.abs(d).max(initial=0.0) <= self.tol * scale)
        if self.kind == "halfspaces":
            ok_i = np.all(self.ineqs @ d <= self.tol * scale) if len(self.ineqs) else True
            ok_e = np.all(np.abs(self.eqs @ d) <= self.tol * scale) if len(self.eqs) else True
            return bool(ok_i and ok_e)
        if self.kind == "generators":
            # Nonnegative least squares gives the distance to cone(G) directly.
            _, resid = nnls(self.generators.T, d)
            return bool(resid <= self.tol * scale)
        return self._decomposition_lp(d).status == "optimal"

    def line_sup(self, u, w) -> float:
        """sup{g >= 0 : u + g*w in K}; +inf when the ray stays in K."""
        u, w = _vec(u), _vec(w)
        if not self.member(u):
            raise PreconditionError("base point is not in the cone")
        if self.kind == "trivial":
            return INF if np.abs(w).max(initial=0.0) <= self.tol else 0.0
        if self.kind == "halfspaces":
            scale = max(1.0, float(np.abs(u).max(initial=0.0)), float(np.abs(w).max(initial=0.0)))
            best = INF
            if len(self.eqs) and np.any(np.abs(self.eqs @ w) > self.tol * scale):
                return 0.0
            if len(self.ineqs):
                aw = self.ineqs @ w
                au = self.ineqs @ u
                mask = aw > self.tol * np.linalg.norm(self.ineqs, axis=1) * max(1.0, np.linalg.norm(w))
                if np.any(mask):
                    ratios = np.maximum(-au[mask], 0.0) / aw[mask]
                    best = float(ratios.min())
            return best
        out = self._decomposition_lp(u, extra=w, maximize_extra=True)
        if out.status == "unbounded":
            return INF
        if out.status != "optimal":
            raise PreconditionError("base point is not in the cone")
        return float(max(out.x[-1], 0.0))


def cone_member(cone: ConeOracle, direction) -> bool:
    return cone.member(direction)


def cone_line_sup(cone: ConeOracle, base, direction) -> float:
    return cone.line_sup(base, direction)


# ---------------------------------------------------------------------------
# Bodies
#
# Each body exposes ``level(x)``: negative inside, positive outside, and
# convex along lines, so the ray machinery can reason about sign changes.


class ConvexBody:
    dim: int
    interior_hint: Optional[np.ndarray] = None

    def level(self, x) -> float:
        raise NotImplementedError

    def member(self, x, margin: float = STRICT_TOL) -> bool:
        return self.level(x) < -margin

    def near_boundary(self, x, margin: float = STRICT_TOL) -> bool:
        return abs(self.level(x)) <= margin

    def recession_cone(self) -> ConeOracle:
        raise CapabilityError(f"no recession cone for {type(self).__name__}")

    def ray_interval(self, origin, direction) -> ExtendedInterval:
        return _interval_by_bisection(self, _vec(origin), _vec(direction))

    def _check_hint(self):
        if self.interior_hint is not None and not self.member(self.interior_hint, margin=0.0):
            raise ValueError("declared interior hint is not in the body")


def _roots_interval(body: ConvexBody, origin, direction, breakpoints) -> ExtendedInterval:
    """Assemble {t >= 0 : origin + t*direction in body} from candidate breakpoints.

    The set is an interval, so testing one point per piece between sorted
    breakpoints recovers it exactly up to the breakpoint accuracy.
    """
    pts = sorted({0.0, *(t for t in breakpoints if math.isfinite(t) and t > 0.0)})
    probes = []
    for a, b in zip(pts, pts[1:]):
        probes.append((a, b, 0.5 * (a + b)))
    last = pts[-1]
    probes.append((last, INF, last + max(1.0, abs(last))))
    inside = [(a, b) for a, b, t in probes if body.level(origin + t * direction) < 0.0]
    if not inside:
        return EMPTY_INTERVAL
    lo = inside[0][0]
    hi = inside[-1][1]
    if hi == INF and not body.recession_cone().member(direction):
        # Numerically inside far away but not a recession direction: trust the cone.
        raise OracleError("ray appears unbounded inside the body but is not a recession direction")
    return ExtendedInterval(lo, hi)


def _quadratic_roots(a: float, b: float, c: float, tol: float = 1e-14):
    """Real roots of a t^2 + b t + c, robust against cancellation."""
    scale = max(abs(a), abs(b), abs(c), 1e-300)
    if abs(a) <= tol * scale:
        if abs(b) <= tol * scale:
            return []
        return [-c / b]
    disc = b * b - 4 * a * c
    if disc < 0:
        return []
    sq = math.sqrt(disc)
    q = -0.5 * (b + math.copysign(sq, b))
    roots = [q / a]
    if q != 0:
        roots.append(c / q)
    return sorted(roots)


@dataclass(frozen=True, eq=False)
class Ball(ConvexBody):
    center: np.ndarray
    radius: float
    interior_hint: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "center", _vec(self.center))
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")
        self._check_hint()

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def level(self, x) -> float:
        return float(np.linalg.norm(_vec(x) - self.center) - self.radius)

    def recession_cone(self) -> ConeOracle:
        return ConeOracle.trivial(self.dim)

    def ray_interval(self, origin, direction) -> ExtendedInterval:
        o, r = _vec(origin), _vec(direction)
        p = o - self.center
        roots = _quadratic_roots(r @ r, 2 * p @ r, p @ p - self.radius**2)
        if len(roots) < 2:
            return EMPTY_INTERVAL
        t1, t2 = roots
        if t2 <= 0 or t1 >= t2:
            return EMPTY_INTERVAL
        return ExtendedInterval(max(t1, 0.0), t2)


@dataclass(frozen=True, eq=False)
class ConvexQuadratic(ConvexBody):
    """{x : x^T Q x + c^T x + d < 0} with Q symmetric positive semidefinite."""

    Q: np.ndarray
    c: np.ndarray
    d: float
    interior_hint: Optional[np.ndarray] = None

    def __post_init__(self):
        Q = np.asarray(self.Q, dtype=float)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
            raise ValueError("Q must be square")
        if not np.allclose(Q, Q.T, atol=PSD_TOL):
            raise ValueError("Q must be symmetric")
        eig = np.linalg.eigvalsh(Q)
        if eig.size and eig.min() < -PSD_TOL * max(1.0, abs(eig).max()):
            raise ValueError("Q must be positive semidefinite")
        object.__setattr__(self, "Q", 0.5 * (Q + Q.T))
        object.__setattr__(self, "c", _vec(self.c))
        object.__setattr__(self, "d", float(self.d))
        self._check_hint()

    @property
    def dim(self) -> int:
        return self.c.shape[0]

    def level(self, x) -> float:
        x = _vec(x)
        return float(x @ self.Q @ x + self.c @ x + self.d)

    def recession_cone(self) -> ConeOracle:
        w, V = np.linalg.eigh(self.Q)
        big = np.abs(w) > PSD_TOL * max(1.0, np.abs(w).max(initial=0.0))
        return ConeOracle.from_halfspaces(self.c.reshape(1, -1), V[:, big].T, dim=self.dim)

    def ray_interval(self, origin, direction) -> ExtendedInterval:
        o, r = _vec(origin), _vec(direction)
        Qr = self.Q @ r
        a = float(r @ Qr)
        if np.linalg.norm(Qr) <= PSD_TOL * max(1.0, np.linalg.norm(r)):
            a = 0.0
        b = float(2 * o @ Qr + self.c @ r)
        c = self.level(o)
        return _roots_interval(self, o, r, _quadratic_roots(a, b, c))


@dataclass(frozen=True, eq=False)
class StrictHalfspaces(ConvexBody):
    """{x : A x < beta} (componentwise)."""

    A: np.ndarray
    beta: np.ndarray
    interior_hint: Optional[np.ndarray] = None

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "beta", _vec(self.beta))
        if self.beta.shape[0] != A.shape[0]:
            raise ValueError("one right-hand side per halfspace")
        self._check_hint()

    @property
    def dim(self) -> int:
        return self.A.shape[1]

    def level(self, x) -> float:
        norms = np.linalg.norm(self.A, axis=1)
        return float(np.max((self.A @ _vec(x) - self.beta) / norms))

    def recession_cone(self) -> ConeOracle:
        return ConeOracle.from_halfspaces(self.A, None, dim=self.dim)

    def ray_interval(self, origin, direction) -> ExtendedInterval:
        o, r = _vec(origin), _vec(direction)
        lo, hi = 0.0, INF
        slack = self.beta - self.A @ o
        rate = self.A @ r
        for s, k in zip(slack, rate):
            if k == 0.0:
                if s <= 0:
                    return EMPTY_INTERVAL
            elif k > 0:
                hi = min(hi, s / k)
            else:
                lo = max(lo, s / k)
        if lo >= hi:
            return EMPTY_INTERVAL
        return ExtendedInterval(lo, hi)


@dataclass(frozen=True, eq=False)
class SecondOrderBody(ConvexBody):
    """{x : ||F x + g|| < h^T x + e}."""

    F: np.ndarray
    g: np.ndarray
    h: np.ndarray
    e: float
    interior_hint: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "F", np.atleast_2d(np.asarray(self.F, dtype=float)))
        object.__setattr__(self, "g", _vec(self.g))
        object.__setattr__(self, "h", _vec(self.h))
        object.__setattr__(self, "e", float(self.e))
        if self.F.shape != (self.g.shape[0], self.h.shape[0]):
            raise ValueError("F must be len(g) x len(h)")
        self._check_hint()

    @property
    def dim(self) -> int:
        return self.h.shape[0]

    def level(self, x) -> float:
        x = _vec(x)
        return float(np.linalg.norm(self.F @ x + self.g) - (self.h @ x + self.e))

    def recession_cone(self) -> ConeOracle:
        # {d : ||F d|| <= h^T d}.  Polyhedral exactly when F has rank <= 1.
        U, s, Vt = np.linalg.svd(self.F)
        rank = int(np.sum(s > PSD_TOL * max(1.0, s.max(initial=0.0))))
        if rank == 0:
            return ConeOracle.from_halfspaces(-self.h.reshape(1, -1), None, dim=self.dim)
        if rank > 1:
            raise CapabilityError("second-order body with rank(F) > 1 has a non-polyhedral recession cone")
        a = s[0] * Vt[0]
        return ConeOracle.from_halfspaces(np.vstack([a - self.h, -a - self.h]), None, dim=self.dim)

    def ray_interval(self, origin, direction) -> ExtendedInterval:
        o, r = _vec(origin), _vec(direction)
        p, q = self.F @ o + self.g, self.F @ r
        s0, s1 = self.h @ o + self.e, self.h @ r
        roots = _quadratic_roots(q @ q - s1 * s1, 2 * (p @ q - s0 * s1), p @ p - s0 * s0)
        if s1 != 0:
            roots.append(-s0 / s1)
        return _roots_interval(self, o, r, roots)


@dataclass(frozen=True, eq=False)
class MinkowskiSumWithCone(ConvexBody):
    """base + K for an open base body (ball or strict halfspaces) and a cone K."""

    base: ConvexBody
    cone: ConeOracle
    interior_hint: Optional[np.ndarray] = None

    def __post_init__(self):
        if not isinstance(self.base, (Ball, StrictHalfspaces)):
            raise CapabilityError("Minkowski sums are supported for ball and halfspace bases")
        if self.cone.kind not in ("generators", "trivial"):
            raise CapabilityError("the added cone must be given by generators")
        self._check_hint()

    @property
    def dim(self) -> int:
        return self.base.dim

    def level(self, x) -> float:
        x = _vec(x)
        G = self.cone.generators
        if isinstance(self.base, Ball):
            v = x - self.base.center
            if len(G) == 0:
                dist = np.linalg.norm(v)
            else:
                _, dist = nnls(G.T, v)
            return float(dist - self.base.radius)
        # Halfspace base: min over mu >= 0 of max_i (a_i (x - G^T mu) - beta_i)/|a_i|.
        A = self.base.A / np.linalg.norm(self.base.A, axis=1)[:, None]
        beta = self.base.beta / np.linalg.norm(self.base.A, axis=1)
        k = len(G)
        # variables (mu, s): minimise s s.t. -A G^T mu - s <= beta - A x
        c = np.zeros(k + 1)
        c[-1] = 1.0
        A_ub = np.hstack([-(A @ G.T) if k else np.zeros((len(A), 0)), -np.ones((len(A), 1))])
        lower = np.zeros(k + 1)
        lower[-1] = -INF
        out = lp_solve(LpProblem.build(c, A_ub, beta - A @ x, lower=lower))
        if out.status == "unbounded":
            return -INF
        return float(out.objective)

    def recession_cone(self) -> ConeOracle:
        base = self.base.recession_cone()
        return base.plus(self.cone.generators)


def _interval_by_bisection(body: ConvexBody, origin: np.ndarray, r: np.ndarray) -> ExtendedInterval:
    """Generic ray interval for bodies with a convex level function.

    Unbounded intervals are declared only for recession directions.  For the
    bounded case the level function is minimised by golden-section search on
    a bracket that grows geometrically up to LAMBDA_MAX, then both endpoints
    are located by bisection.
    """
    phi = lambda t: body.level(origin + t * r)
    recedes = body.recession_cone().member(r)
    if recedes:
        # level is nonincreasing along a recession direction.
        if phi(0.0) < 0:
            return ExtendedInterval(0.0, INF)
        if not phi(LAMBDA_MAX) < 0:
            return EMPTY_INTERVAL
        lo = _bisect(phi, 0.0, LAMBDA_MAX)
        return ExtendedInterval(lo, INF)

    # Find T with phi(T) > 0 and phi nondecreasing beyond T.
    T = 1.0
    while True:
        if phi(T) > 0 and phi(T) >= phi(0.5 * T):
            break
        T *= 2.0
        if T > LAMBDA_MAX:
            raise OracleError("ray stays near the body up to LAMBDA_MAX without being a recession direction")
    a, b = 0.0, T
    g = (math.sqrt(5) - 1) / 2
    x1, x2 = b - g * (b - a), a + g * (b - a)
    f1, f2 = phi(x1), phi(x2)
    while b - a > INTERVAL_TOL * max(1.0, T) * 1e-3:
        if f1 < 0 or f2 < 0:
            break
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - g * (b - a)
            f1 = phi(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + g * (b - a)
            f2 = phi(x2)
    if phi(0.0) < 0:
        tmin = 0.0
    elif f1 < 0:
        tmin = x1
    elif f2 < 0:
        tmin = x2
    else:
        return EMPTY_INTERVAL
    lo = 0.0 if phi(0.0) < 0 else _bisect(phi, 0.0, tmin)
    hi = _bisect(phi, tmin, T, rising=True)
    return ExtendedInterval(lo, hi)


def _bisect(phi, a: float, b: float, rising: bool = False) -> float:
    """Locate the sign change of phi on [a, b].

    Default: phi(a) >= 0 > phi(b) (entry point).  With rising=True:
    phi(a) < 0 <= phi(b) (exit point).
    """
    while b - a > INTERVAL_TOL * max(1.0, abs(b)):
        mid = 0.5 * (a + b)
        inside = phi(mid) < 0
        if rising:
            a, b = (mid, b) if inside else (a, mid)
        else:
            a, b = (a, mid) if inside else (mid, b)
    return 0.5 * (a + b)


def ray_interval(body: ConvexBody, origin, direction) -> ExtendedInterval:
    r = _vec(direction)
    if not np.any(r):
        raise PreconditionError("direction must be nonzero")
    return body.ray_interval(origin, r)


def member(body: ConvexBody, x) -> bool:
    return body.member(x)


def recession_cone(body: ConvexBody) -> ConeOracle:
    return body.recession_cone()

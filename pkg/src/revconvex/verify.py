"""Independent checks: sampling, set membership from raw definitions, brute force.

Nothing here calls the cut constructors' shortcuts.  Membership in the inner
approximations of C is decided by a decomposition LP written straight from
the set definitions, and separation is checked by subset enumeration.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull

from .classify import N1, N2, RayClassification
from .convexbody import INF, STRICT_TOL, CapabilityError, ConvexBody, LAMBDA_MAX
from .cuts_recession import EpsilonTable, ExtendedFormulation
from .numkernel import LpProblem, lp_solve
from .polyhedron import LinearCut, LinearSystem

FEAS_TOL = 1e-7
BRUTE_LIMIT = 20


class SamplingExhausted(UserWarning):
    pass


@dataclass(frozen=True)
class Violation:
    point: np.ndarray
    cut: str
    magnitude: float


@dataclass
class SampleReport:
    tested: int = 0
    violations: list = field(default_factory=list)
    max_violation: float = 0.0
    skipped: int = 0

    def record(self, point, cut: str, magnitude: float, tol: float = FEAS_TOL):
        self.max_violation = max(self.max_violation, float(magnitude))
        if magnitude > tol:
            self.violations.append(Violation(np.asarray(point), cut, float(magnitude)))

    @property
    def passed(self) -> bool:
        return not self.violations

    def summary(self) -> dict:
        return {
            "tested": self.tested,
            "violations": len(self.violations),
            "max_violation": self.max_violation,
            "skipped": self.skipped,
        }


# -- sampling ----------------------------------------------------------------


def sample_box(box, n: int, rng: np.random.Generator) -> np.ndarray:
    box = np.asarray(box, dtype=float)
    return rng.uniform(box[:, 0], box[:, 1], size=(n, box.shape[0]))


def sample_reverse_convex(
    P: LinearSystem,
    body: ConvexBody,
    box,
    n: int,
    seed: int = 0,
    margin: float = STRICT_TOL,
    tol: float = FEAS_TOL,
) -> np.ndarray:
    """Up to n uniform box points lying in P and clearly outside C.

    Points within ``margin`` of the boundary of C are discarded.  Draws stop
    after 100 n attempts, with a warning when nothing was found.
    """
    if n < 1:
        return np.zeros((0, len(box)))
    rng = np.random.default_rng(seed)
    hits, drawn = [], 0
    batch = max(256, n)
    while len(hits) < n and drawn < 100 * n:
        pts = sample_box(box, batch, rng)
        drawn += batch
        ok = P.member_many(pts, tol)
        for x in pts[ok]:
            if body.level(x) > margin:
                hits.append(x)
                if len(hits) == n:
                    break
    if not hits:
        warnings.warn("no point of P minus C found in the box", SamplingExhausted)
        return np.zeros((0, len(box)))
    return np.array(hits)


def sample_cone_box(cls: RayClassification, upper: float, n: int, seed: int = 0) -> np.ndarray:
    """Uniform points of P^B with nonbasic coordinates in [0, upper], in original space."""
    rng = np.random.default_rng(seed)
    u = rng.uniform(0.0, upper, size=(n, cls.size))
    return cls.cone.point(u)


# -- membership ------------------------------------------------------------------


def _decomposition_member(
    cls: RayClassification,
    x,
    lo: dict,
    hi: dict,
    backward: Sequence[np.ndarray] = (),
    slack: float = 1e-9,
) -> bool:
    """Is x - apex = sum_j w_j r_j + sum_b eta_b d_b + q within slack?

    The sum runs over the keys of ``lo``; delta_j lo_j <= w_j <= delta_j hi_j
    with sum delta = 1, eta >= 0, q in recc(C).  Infinite hi drops the upper
    row, which is the homogenized closure of an unbounded segment.
    """
    x = np.asarray(x, dtype=float)
    rays = cls.cone.rays_y
    n = x.shape[0]
    K = cls.body.recession_cone()
    D, K_ub, K_eq, K_lo = K.parametrization()
    segs = sorted(lo)
    s, b, kq = len(segs), len(backward), D.shape[1]
    # variables: w (s), delta (s), eta (b), cone params (kq), slack e (n, free, |e|<=slack)
    nv = 2 * s + b + kq + n
    iw, idl, ie, iq, isl = 0, s, 2 * s, 2 * s + b, 2 * s + b + kq
    A_eq = np.zeros((n + 1, nv))
    b_eq = np.zeros(n + 1)
    for t, j in enumerate(segs):
        A_eq[:n, iw + t] = rays[:, j]
    for t, d in enumerate(backward):
        A_eq[:n, ie + t] = d
    A_eq[:n, iq : iq + kq] = D
    A_eq[:n, isl:] = np.eye(n)
    b_eq[:n] = x - cls.cone.apex_y
    A_eq[n, idl : idl + s] = 1.0
    b_eq[n] = 1.0
    rows, rhs = [], []
    for t, j in enumerate(segs):
        r = np.zeros(nv)
        r[idl + t] = lo[j]
        r[iw + t] = -1.0
        rows.append(r)
        rhs.append(0.0)
        if math.isfinite(hi[j]):
            r = np.zeros(nv)
            r[iw + t] = 1.0
            r[idl + t] = -hi[j]
            rows.append(r)
            rhs.append(0.0)
    for blk in (K_ub,):
        for krow in blk:
            r = np.zeros(nv)
            r[iq : iq + kq] = krow
            rows.append(r)
            rhs.append(0.0)
    eq_extra = []
    for krow in K_eq:
        r = np.zeros(nv)
        r[iq : iq + kq] = krow
        eq_extra.append(r)
    lower = np.concatenate([np.full(s, -INF), np.zeros(s), np.zeros(b), K_lo, np.full(n, -slack)])
    upper = np.concatenate([np.full(2 * s + b + kq, INF), np.full(n, slack)])
    if eq_extra:
        A_eq = np.vstack([A_eq, eq_extra])
        b_eq = np.concatenate([b_eq, np.zeros(len(eq_extra))])
    prob = LpProblem.build(
        np.zeros(nv), np.array(rows) if rows else None, np.array(rhs) if rows else None,
        A_eq, b_eq, lower=lower, upper=upper,
    )
    return lp_solve(prob).status == "optimal"


def _crossing(cls: RayClassification) -> tuple:
    return tuple(j for j in range(cls.size) if cls.tags[j] in (N1, N2))


def membership_TC(cls: RayClassification, x, margin: float = 0.0, slack: float = 1e-9) -> bool:
    """x in apex + conv(segments [lambda1_j, lambda2_j] r_j) + recc(C).

    A positive margin shrinks each segment (open ends), a negative one grows it.
    """
    segs = _crossing(cls)
    if not segs:
        return False
    lo = {j: cls.lambda1[j] + margin for j in segs}
    hi = {j: cls.lambda2[j] - margin for j in segs}
    return _decomposition_member(cls, x, lo, hi, slack=slack)


def membership_GDC(cls: RayClassification, D: Iterable[int], x, margin: float = 0.0, slack: float = 1e-9) -> bool:
    """x in apex + conv(halflines [lambda1_j, inf) r_j, j in D) + recc(C)."""
    D = tuple(D)
    if not D:
        return False
    lo = {j: cls.lambda1[j] + margin for j in D}
    hi = {j: INF for j in D}
    return _decomposition_member(cls, x, lo, hi, slack=slack)


def membership_S0C(cls: RayClassification, x, margin: float = 0.0, slack: float = 1e-9) -> bool:
    return membership_GDC(cls, _crossing(cls), x, margin, slack)


def membership_SkC(cls: RayClassification, k: int, x, margin: float = 0.0, slack: float = 1e-9) -> bool:
    """x in apex + conv(segments [0, lambda2_j] r_j, j crossing on a bounded interval)
    + (-inf, 0] r_k + recc(C)."""
    segs = cls.N2
    lo = {j: 0.0 for j in segs}
    hi = {j: cls.lambda2[j] - margin for j in segs}
    return _decomposition_member(cls, x, lo, hi, backward=[-cls.ray(k)], slack=slack)


def robust_membership(test: Callable[..., bool], x, tol: float = 1e-6) -> Optional[bool]:
    """True/False when shrinking and growing the set by tol agree, None otherwise."""
    inner = test(x, margin=tol, slack=0.0)
    if inner:
        return True
    outer = test(x, margin=-tol, slack=tol)
    if not outer:
        return False
    return None


def lambda_star_by_membership(cls: RayClassification, k: int, j: int, cap: float = 1e6, tol: float = 1e-9) -> float:
    """sup{t >= 0 : apex + t r_j in S_k^C} by bisection on the membership LP."""
    apex, r = cls.cone.apex_y, cls.ray(j)
    inside = lambda t: membership_SkC(cls, k, apex + t * r)
    if not inside(0.0):
        return 0.0
    if inside(cap):
        return INF
    a, b = 0.0, cap
    while b - a > tol * max(1.0, a):
        mid = 0.5 * (a + b)
        if inside(mid):
            a = mid
        else:
            b = mid
    return a


# -- set-function checks ------------------------------------------------------------


def brute_force_separation(table: EpsilonTable, x) -> tuple[tuple, float]:
    """max over S subset of M of the cut left-hand side, by enumeration.

    Ties go to the smaller S, then the lexicographically first.
    """
    M = table.M
    if len(M) > BRUTE_LIMIT:
        raise CapabilityError(f"|M| = {len(M)} is too large to enumerate")
    best_S, best = (), table.value((), x)
    for r in range(1, len(M) + 1):
        for S in itertools.combinations(M, r):
            v = table.value(S, x)
            if v > best + 1e-12:
                best_S, best = S, v
    return best_S, best


def check_supermodular(f: Callable[[frozenset], float], ground: Sequence[int], slack: float = 1e-9) -> tuple[bool, float]:
    """f(S+i) - f(S) <= f(T+i) - f(T) + slack for all S subset T not containing i.

    Returns (passed, worst violation).
    """
    ground = tuple(ground)
    cache = {}

    def val(S):
        if S not in cache:
            cache[S] = f(S)
        return cache[S]

    worst = -INF
    for i in ground:
        rest = [g for g in ground if g != i]
        # each element of rest is in neither, T only, or both
        for assign in itertools.product((0, 1, 2), repeat=len(rest)):
            S = frozenset(g for g, a in zip(rest, assign) if a == 2)
            T = frozenset(g for g, a in zip(rest, assign) if a >= 1)
            gap = (val(S | {i}) - val(S)) - (val(T | {i}) - val(T))
            worst = max(worst, gap)
    if worst == -INF:
        worst = 0.0
    return worst <= slack, worst


@dataclass(frozen=True)
class ProjectionReport:
    probes: int
    agree: int
    ambiguous: int
    false_in: int  # projection says in, inequalities say out
    false_out: int

    @property
    def passed(self) -> bool:
        return self.false_in == 0 and self.false_out == 0


def ef_projection_check(ef: ExtendedFormulation, table: EpsilonTable, points, tol: float = 1e-6) -> ProjectionReport:
    agree = amb = fi = fo = 0
    cuts = [c for c in table.all_cuts() if not c.trivial]
    for x in np.atleast_2d(points):
        worst = max((float(c.violation(x)) for c in cuts), default=-INF)
        inside = ef.contains(x)
        if abs(worst) <= tol:
            amb += 1
        elif worst < 0 and not inside:
            fo += 1
        elif worst > 0 and inside:
            fi += 1
        else:
            agree += 1
    return ProjectionReport(len(np.atleast_2d(points)), agree, amb, fi, fo)


# -- random tables -------------------------------------------------------------------


def random_table(rng: np.random.Generator, m: int, n_cols: int, context: str = "G_D",
                 inf_prob: float = 0.15) -> EpsilonTable:
    """A table with all rows in M: positive suprema, some infinite."""
    n = m + n_cols
    rows, cols = tuple(range(m)), tuple(range(m, n))
    eps = rng.uniform(0.1, 3.0, size=(m, n_cols))
    eps[rng.random((m, n_cols)) < inf_prob] = INF
    left = rng.uniform(0.3, 3.0, size=n) if context == "G_D" else np.ones(n)
    return EpsilonTable.from_values(context, n, rows, cols, eps, left)


# -- hull fill -------------------------------------------------------------------------


def uncovered_fraction(points: np.ndarray, box, n_probe: int = 100_000, seed: int = 1) -> float:
    """Share of the box outside conv(points), measured by uniform probes."""
    box = np.asarray(box, dtype=float)
    if len(points) <= box.shape[0]:
        return 1.0
    hull = ConvexHull(points)
    rng = np.random.default_rng(seed)
    probes = sample_box(box, n_probe, rng)
    lhs = probes @ hull.equations[:, :-1].T + hull.equations[:, -1]
    inside = np.all(lhs <= 1e-12, axis=1)
    return float(1.0 - inside.mean())


# -- independent certification -------------------------------------------------------------


def term_minimum(system: LinearSystem, n: int, alpha) -> float:
    """min alpha^T y over a term system in (y, aux) using the HiGHS solver."""
    c = np.zeros(system.n)
    c[:n] = alpha
    bounds = [(None if not math.isfinite(lo) else lo, None) for lo in system.lower]
    res = linprog(
        c,
        A_ub=system.A_ub if len(system.A_ub) else None,
        b_ub=system.b_ub if len(system.A_ub) else None,
        A_eq=system.A_eq if len(system.A_eq) else None,
        b_eq=system.b_eq if len(system.A_eq) else None,
        bounds=bounds,
        method="highs",
    )
    if res.status == 3:
        return -INF
    if res.status == 2:
        return INF
    if res.status != 0:
        raise RuntimeError(f"HiGHS failed: {res.message}")
    return float(res.fun)


def certify_cut(terms, cut: LinearCut) -> float:
    """Smallest slack min_term (alpha^T y) - beta for a >= cut in original space."""
    a, b = cut.coef, cut.rhs
    if cut.sense == "<=":
        a, b = -a, -b
    return min(term_minimum(t.system, t.n, a) - b for t in terms)


def two_term_coverage(cls: RayClassification, disj, points, tol: float = FEAS_TOL) -> SampleReport:
    """Check that every point satisfies at least one side of the disjunction."""
    rep = SampleReport()
    pts = np.atleast_2d(points)
    if not len(pts):
        return rep
    u = cls.cone.coords(pts)
    worst = np.minimum(disj.left.violation(u), disj.right.violation(u))
    rep.tested = len(pts)
    for y, w in zip(pts, worst):
        rep.record(y, "two-term disjunction", float(w), tol)
    return rep


def cut_validity(cls: RayClassification, cuts: Sequence[LinearCut], points, tol: float = FEAS_TOL) -> SampleReport:
    """Every point must satisfy every cut (nonbasic or original space)."""
    rep = SampleReport()
    pts = np.atleast_2d(points)
    if not len(pts):
        return rep
    coords = cls.cone.coords(pts)
    rep.tested = len(pts)
    for c in cuts:
        viol = c.violation(coords if c.space == "nonbasic" else pts)
        for y, v in zip(pts, viol):
            rep.record(y, c.note, float(v), tol)
    return rep


def union_validity(terms, points, tol: float = FEAS_TOL) -> SampleReport:
    rep = SampleReport()
    for y in np.atleast_2d(points):
        rep.tested += 1
        if not any(t.contains(y, tol) for t in terms):
            rep.record(y, "no term contains the point", 1.0, tol)
    return rep


__all__ = [
    "LAMBDA_MAX",
    "SampleReport",
    "brute_force_separation",
    "certify_cut",
    "check_supermodular",
    "cut_validity",
    "ef_projection_check",
    "lambda_star_by_membership",
    "membership_GDC",
    "membership_S0C",
    "membership_SkC",
    "membership_TC",
    "random_table",
    "robust_membership",
    "sample_cone_box",
    "sample_reverse_convex",
    "term_minimum",
    "two_term_coverage",
    "uncovered_fraction",
    "union_validity",
]

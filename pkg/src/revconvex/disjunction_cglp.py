"""Valid disjunctions for P minus C and the cut-generating LP over their terms."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .classify import BOUNDARY, INSIDE, OUTSIDE, RayClassification, check_assumption1
from .convexbody import PreconditionError
from .cuts_basic import (
    TwoTermDisjunction,
    ValidityError,
    standard_intersection_cut,
    two_term_disjunction,
    with_emptiness,
)
from .cuts_recession import (
    EpsilonTable,
    build_epsilon_table_GD,
    build_epsilon_table_Sk,
    build_extended_formulation,
    build_sk_geometry,
    sk_apex_cut,
)
from .numkernel import LpProblem, feasible_point, lp_solve
from .polyhedron import LinearCut, LinearSystem, lift_cut

EXPLICIT_LIMIT = 6
CUT_TOL = 1e-6


class EmptyRegionError(ValueError):
    """Every term is empty, so P minus C is empty."""

    def __init__(self, message: str, certificates=()):
        super().__init__(message)
        self.certificates = tuple(certificates)


@dataclass(frozen=True, eq=False)
class DisjunctiveTerm:
    """A polyhedron over (y, aux) whose projection onto y is one term."""

    label: str
    system: LinearSystem
    n: int
    cuts: tuple = ()  # nonbasic-space cuts that define the term beyond P
    point: Optional[np.ndarray] = None
    ef_blocks: int = 0

    @property
    def n_aux(self) -> int:
        return self.system.n - self.n

    def ge_rows(self) -> tuple[np.ndarray, np.ndarray]:
        return self.system.ge_rows()

    def feasibility(self):
        s = self.system
        return feasible_point(
            s.A_ub if len(s.A_ub) else None, s.b_ub if len(s.A_ub) else None,
            s.A_eq if len(s.A_eq) else None, s.b_eq if len(s.A_eq) else None,
            lower=s.lower, n=s.n,
        )

    def contains(self, y, tol: float = 1e-7) -> bool:
        """Closed membership of y in the projection, with rows loosened by tol."""
        y = np.asarray(y, dtype=float)
        s, n = self.system, self.n
        if self.n_aux == 0:
            return s.member(y, tol)
        if np.any(y < s.lower[:n] - tol):
            return False
        A = np.vstack([s.A_ub, s.A_eq, -s.A_eq])
        b = np.concatenate([s.b_ub, s.b_eq, -s.b_eq]) - A[:, :n] @ y + tol
        return lp_solve(LpProblem.build(np.zeros(self.n_aux), A[:, n:], b, lower=s.lower[n:])).optimal


def _with_nonbasic_cuts(base: LinearSystem, cls: RayClassification, cuts: Sequence[LinearCut]) -> LinearSystem:
    rows, rhs = [], []
    for cut in cuts:
        lifted = lift_cut(cut, cls.cone)
        a, b = lifted.as_le()
        rows.append(a)
        rhs.append(b)
    if not rows:
        return base
    return base.with_rows(np.array(rows), np.array(rhs))


def _nonneg_coords(base: LinearSystem, cls: RayClassification) -> LinearSystem:
    """Add u = L y + l >= 0, i.e. membership in the simplicial cone."""
    L, l = cls.cone.coord_map()
    return base.with_rows(-L, l)


def _term(label: str, cls: RayClassification, cuts: Sequence[LinearCut]) -> DisjunctiveTerm:
    base = _nonneg_coords(cls.cone.original_system(), cls)
    sysm = _with_nonbasic_cuts(base, cls, cuts)
    return DisjunctiveTerm(label, sysm, base.n, tuple(cuts))


def _term_with_ef(label: str, cls: RayClassification, table: EpsilonTable, extra: Sequence[LinearCut]) -> DisjunctiveTerm:
    """P, the cone, extra cuts, and the extended formulation over fresh aux variables."""
    t = _term(label, cls, extra)
    ef = build_extended_formulation(table)
    L, l = cls.cone.coord_map()
    n = t.n
    sysm = t.system.extend(ef.n_aux, lower=ef.lower[ef.n_x:])
    Gx, Ga = ef.G[:, : ef.n_x], ef.G[:, ef.n_x :]
    # Gx (L y + l) + Ga a >= h   ->   -(Gx L) y - Ga a <= -(h - Gx l)
    rows = np.hstack([-(Gx @ L), -Ga])
    sysm = sysm.with_rows(rows, -(ef.h - Gx @ l))
    return DisjunctiveTerm(label, sysm, n, tuple(extra), ef_blocks=1)


def _family_term(label: str, cls: RayClassification, table: EpsilonTable, extra: Sequence[LinearCut],
                 limit: int) -> DisjunctiveTerm:
    if len(table.M) <= limit:
        cuts = [c for c in table.all_cuts() if not c.trivial]
        return _term(label, cls, list(extra) + cuts)
    return _term_with_ef(label, cls, table, extra)


def _keep_nonempty(terms: list[DisjunctiveTerm]) -> list[DisjunctiveTerm]:
    kept, certs = [], []
    for t in terms:
        res = t.feasibility()
        if res.feasible:
            kept.append(t)
        else:
            certs.append((t.label, res.certificate))
    if terms and not kept:
        raise EmptyRegionError("every disjunctive term is empty against P", certs)
    return kept


def build_two_term(cls: RayClassification, disj: Optional[TwoTermDisjunction] = None) -> list[DisjunctiveTerm]:
    if disj is None:
        disj = two_term_disjunction(cls)
    disj = with_emptiness(cls, disj)
    terms = []
    for label, cut, st in (("left", disj.left, disj.left_status), ("right", disj.right, disj.right_status)):
        if st.state != "empty":
            terms.append(_term(label, cls, [cut]))
    if not terms:
        raise EmptyRegionError(
            "both sides are empty against P",
            [("left", disj.left_status.certificate), ("right", disj.right_status.certificate)],
        )
    return terms


@dataclass(frozen=True)
class MultiTermReport:
    terms: list
    tables: dict = field(default_factory=dict)  # label -> EpsilonTable
    apex_cuts: dict = field(default_factory=dict)  # label -> LinearCut
    notes: tuple = ()


def build_multiterm(cls: RayClassification, explicit_limit: int = EXPLICIT_LIMIT) -> MultiTermReport:
    """Terms P^B minus S_0 and P^B minus S_k (k crossing), each relaxed by its cut family."""
    notes = []
    terms, tables, apex = [], {}, {}
    if cls.apex == OUTSIDE:
        t0 = build_epsilon_table_GD(cls)
        tables["S0"] = t0
        terms.append(_family_term("S0", cls, t0, [], explicit_limit))
    elif cls.apex == BOUNDARY:
        a1 = check_assumption1(cls)
        if not a1:
            raise ValidityError(a1.detail, a1.witness)
        terms.append(_point_term(cls))
        if cls.N0:
            notes.append("boundary apex with missing rays: extrapolated construction")
    else:
        notes.append("apex inside C: term S0 is empty and dropped")
    for k in cls.N2:
        label = f"S{cls.cone.label(k)}"
        geom = build_sk_geometry(cls, k)
        tk = build_epsilon_table_Sk(cls, geom)
        tables[label] = tk
        extra = []
        if not geom.assumption3:
            cut = sk_apex_cut(geom)
            apex[label] = cut
            extra.append(cut)
            notes.append(f"{label}: every missing ray recedes into S_k; apex cut added")
        terms.append(_family_term(label, cls, tk, extra, explicit_limit))
    return MultiTermReport(_keep_nonempty(terms), tables, apex, tuple(notes))


def _point_term(cls: RayClassification) -> DisjunctiveTerm:
    base = cls.cone.original_system()
    apex = cls.cone.apex_y
    sysm = base.with_rows(A_eq=np.eye(base.n), b_eq=apex)
    return DisjunctiveTerm("point", sysm, base.n, point=apex)


def boundary_case(cls: RayClassification) -> list[DisjunctiveTerm]:
    """Terms {apex} and P intersected with sum x_j/lambda2_j >= 1."""
    if cls.apex == OUTSIDE:
        raise PreconditionError("apex is outside cl(C)")
    a1 = check_assumption1(cls)
    if not a1:
        raise ValidityError(a1.detail, a1.witness)
    cut = standard_intersection_cut(cls) if cls.apex == INSIDE else _exit_cut(cls)
    terms = [_term("exit", cls, [cut])]
    if cls.apex == BOUNDARY:
        terms.insert(0, _point_term(cls))
    return _keep_nonempty(terms)


def _exit_cut(cls: RayClassification) -> LinearCut:
    lam = cls.lambda2
    coef = np.zeros(cls.size)
    fin = np.isfinite(lam)
    coef[fin] = 1.0 / lam[fin]
    return LinearCut(coef, ">=", 1.0, note="exit-parameter cut from a boundary apex")


# -- CGLP ----------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CglpCut:
    alpha: np.ndarray
    beta: float
    violation: float
    multipliers: tuple  # one array per term, over that term's ge-rows
    labels: tuple

    def as_cut(self) -> LinearCut:
        return LinearCut(self.alpha, ">=", self.beta, space="original", note="CGLP cut")

    def certify(self, terms: Sequence[DisjunctiveTerm], tol: float = 1e-6) -> float:
        """Worst multiplier residual across terms (<= tol means certified)."""
        worst = 0.0
        for t, u in zip(terms, self.multipliers):
            G, h = t.ge_rows()
            if np.any(u < -tol):
                worst = max(worst, float(-u.min()))
            worst = max(worst, float(np.abs(G[:, : t.n].T @ u - self.alpha).max(initial=0.0)))
            if t.n_aux:
                worst = max(worst, float(np.abs(G[:, t.n :].T @ u).max(initial=0.0)))
            worst = max(worst, self.beta - float(h @ u))
        return worst


def cglp_separate(terms: Sequence[DisjunctiveTerm], x_hat, cut_tol: float = CUT_TOL) -> Optional[CglpCut]:
    """Most violated alpha^T y >= beta valid for every term, normalized by sum of multipliers."""
    if not terms:
        raise PreconditionError("the CGLP needs at least one term")
    x_hat = np.asarray(x_hat, dtype=float)
    n = terms[0].n
    if x_hat.shape != (n,):
        raise PreconditionError(f"candidate has dimension {x_hat.shape}, expected {n}")
    blocks = [t.ge_rows() for t in terms]
    sizes = [G.shape[0] for G, _ in blocks]
    nu = sum(sizes)
    nv = n + 1 + nu  # alpha, beta, u
    A_eq, b_eq, A_ub, b_ub = [], [], [], []
    off = n + 1
    for (G, h), t, s in zip(blocks, terms, sizes):
        blk = np.zeros((n, nv))
        blk[:, :n] = np.eye(n)
        blk[:, off : off + s] = -G[:, :n].T
        A_eq.append(blk)
        b_eq.append(np.zeros(n))
        if t.n_aux:
            blk = np.zeros((t.n_aux, nv))
            blk[:, off : off + s] = G[:, n:].T
            A_eq.append(blk)
            b_eq.append(np.zeros(t.n_aux))
        row = np.zeros(nv)
        row[n] = 1.0
        row[off : off + s] = -h
        A_ub.append(row[None, :])
        b_ub.append(np.zeros(1))
        off += s
    norm = np.zeros(nv)
    norm[n + 1 :] = 1.0
    A_eq.append(norm[None, :])
    b_eq.append(np.ones(1))
    c = np.zeros(nv)
    c[:n] = -x_hat
    c[n] = 1.0
    lower = np.zeros(nv)
    lower[: n + 1] = -np.inf
    prob = LpProblem.build(c, np.vstack(A_ub), np.concatenate(b_ub), np.vstack(A_eq), np.concatenate(b_eq),
                           lower=lower, maximize=True)
    out = lp_solve(prob)
    if out.status != "optimal":
        raise PreconditionError(f"CGLP ended {out.status}")
    viol = float(out.objective)
    if viol <= cut_tol:
        return None
    mult, off = [], n + 1
    for s in sizes:
        mult.append(out.x[off : off + s].copy())
        off += s
    return CglpCut(out.x[:n].copy(), float(out.x[n]), viol, tuple(mult), tuple(t.label for t in terms))


def union_contains(terms: Sequence[DisjunctiveTerm], y, tol: float = 1e-7) -> bool:
    return any(t.contains(y, tol) for t in terms)


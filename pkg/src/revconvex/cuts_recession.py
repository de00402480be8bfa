"""Cut families built from cone line-suprema over recession cones.

Two contexts share one table type.  For a set D of rays that meet C, the
"G_D" table holds eps[i, j] = sup{e >= 0 : lambda1_i r_i + e r_j in K_D}
with K_D = cone(r_i : i in D) + recc(C), and cuts read

    sum_{i in S} x_i / lambda1_i - sum_{j not in D} x_j / eps_j(S) <= 1.

For a crossing ray k the "S_k" table uses K_k = recc(C) + cone(-r_k), rows
J = {i : r_i in K_k}, eps[i, j] = sup{e >= 0 : r_i + e r_j in K_k}, and cuts

    sum_{i in S} x_i - sum_{j not in J} x_j / eps_j(S) <= 0.

In both cases eps_j(S) is the minimum over i in S, and +inf when S is empty.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .classify import N1, N2, OUTSIDE, RayClassification
from .convexbody import INF, CapabilityError, ConeOracle, PreconditionError
from .numkernel import LpProblem, lp_solve, solve_or_raise
from .polyhedron import LinearCut

GD, SK = "G_D", "S_k"


def _recip(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    out = np.zeros_like(v)
    fin = np.isfinite(v)
    out[fin] = 1.0 / v[fin]
    return out


@dataclass(frozen=True, eq=False)
class EpsilonTable:
    """Line-suprema eps[r, c] for rows ``rows`` and columns ``cols`` (positions in N).

    ``left`` holds the coefficient of x_i in the cut for each position of N
    (1/lambda1 for G_D, 1 for S_k) and ``rhs`` is the cut right-hand side.
    """

    context: str
    n: int
    rows: tuple
    cols: tuple
    eps: np.ndarray
    left: np.ndarray
    rhs: float
    k: Optional[int] = None
    assumption3: Optional[bool] = None
    tol: float = 1e-9

    @classmethod
    def from_values(cls, context: str, n: int, rows, cols, eps, left, **kw) -> "EpsilonTable":
        rhs = 1.0 if context == GD else 0.0
        eps = np.asarray(eps, dtype=float).reshape(len(rows), len(cols))
        return cls(context, n, tuple(rows), tuple(cols), eps, np.asarray(left, dtype=float), rhs, **kw)

    @property
    def M(self) -> tuple:
        """Rows whose suprema are positive against every column."""
        if not self.cols:
            return self.rows
        return tuple(i for r, i in enumerate(self.rows) if np.all(self.eps[r] > self.tol))

    def eps_hat(self, i: int, j: int) -> float:
        return float(self.eps[self.rows.index(i), self.cols.index(j)])

    def order(self, j: int) -> tuple:
        """M sorted by eps[., j] ascending, ties broken by index."""
        c = self.cols.index(j)
        return tuple(sorted(self.M, key=lambda i: (self.eps[self.rows.index(i), c], i)))

    def eps_of_set(self, S: Iterable[int]) -> np.ndarray:
        S = tuple(S)
        if not S:
            return np.full(len(self.cols), INF)
        idx = [self.rows.index(i) for i in S]
        return self.eps[idx].min(axis=0)

    def _check_subset(self, S) -> tuple:
        S = tuple(sorted(set(int(i) for i in S)))
        bad = set(S) - set(self.M)
        if bad:
            raise PreconditionError(f"indices {sorted(bad)} are not in the M-set {self.M}")
        return S

    def cut(self, S: Iterable[int]) -> LinearCut:
        S = self._check_subset(S)
        coef = np.zeros(self.n)
        for i in S:
            coef[i] = self.left[i]
        if S:
            coef[list(self.cols)] -= _recip(self.eps_of_set(S))
        note = f"{self.context} family, S={{{','.join(str(i + 1) for i in S)}}}"
        return LinearCut(coef, "<=", self.rhs, note=note)

    def value(self, S: Iterable[int], x) -> float:
        """Left-hand side of the cut for S at x (the separation objective)."""
        S = tuple(S)
        x = np.asarray(x, dtype=float)
        if not S:
            return 0.0
        lhs = float(sum(self.left[i] * x[i] for i in S))
        return lhs - float(_recip(self.eps_of_set(S)) @ x[list(self.cols)])

    def all_cuts(self) -> list[LinearCut]:
        M = self.M
        return [self.cut(S) for r in range(len(M) + 1) for S in itertools.combinations(M, r)]


# -- table construction -------------------------------------------------------


def build_epsilon_table_GD(
    cls: RayClassification, D: Optional[Sequence[int]] = None, body=None
) -> EpsilonTable:
    """Table for the G_D context; D defaults to every ray that meets C."""
    if cls.apex != OUTSIDE:
        raise PreconditionError("the G_D family needs the apex outside cl(C)")
    meets = set(cls.N1) | set(cls.N2)
    D = tuple(sorted(meets if D is None else set(int(i) for i in D)))
    if not set(D) <= meets:
        raise PreconditionError(f"D must consist of rays meeting C, got {D}")
    K = (body or cls.body).recession_cone()
    cols = tuple(j for j in range(cls.size) if j not in D)
    rays = cls.cone.rays_y
    K_D = K.plus(rays[:, list(D)].T) if D else K
    eps = np.zeros((len(D), len(cols)))
    for r, i in enumerate(D):
        base = cls.lambda1[i] * rays[:, i]
        for c, j in enumerate(cols):
            eps[r, c] = K_D.line_sup(base, rays[:, j])
    left = _recip(cls.lambda1)
    return EpsilonTable(GD, cls.size, D, cols, eps, left, 1.0)


@dataclass(frozen=True, eq=False)
class SkGeometry:
    k: int
    J: tuple
    lambda_star: np.ndarray
    recc: ConeOracle
    assumption3: bool


def build_sk_geometry(cls: RayClassification, k: int, body=None) -> SkGeometry:
    if cls.tags[k] != N2:
        raise PreconditionError(f"ray {k} does not cross C on a bounded interval")
    K = (body or cls.body).recession_cone()
    rays = cls.cone.rays_y
    K_k = K.plus(-rays[:, [k]].T)
    J = tuple(i for i in range(cls.size) if K_k.member(rays[:, i]))
    if k in J:
        raise CapabilityError(f"ray {k} lies in its own enlarged recession cone")
    lam = np.zeros(cls.size)
    for j in range(cls.size):
        if j in J:
            lam[j] = INF
        elif cls.tags[j] == N2:
            lam[j] = cls.lambda2[j]
        elif cls.tags[j] == N1:
            raise CapabilityError(f"ray {j} recedes into C but not into the enlarged cone")
    a3 = any(j not in J for j in cls.N0)
    return SkGeometry(k, J, lam, K_k, a3)


def build_epsilon_table_Sk(cls: RayClassification, geom: SkGeometry) -> EpsilonTable:
    """Table for the S_k context.  Built even when the N0-escape condition fails;
    the flag is carried so callers can add the apex cut for S_k."""
    rays = cls.cone.rays_y
    J = geom.J
    cols = tuple(j for j in range(cls.size) if j not in J)
    eps = np.zeros((len(J), len(cols)))
    for r, i in enumerate(J):
        for c, j in enumerate(cols):
            eps[r, c] = geom.recc.line_sup(rays[:, i], rays[:, j])
    if np.any(np.isinf(eps)):
        raise CapabilityError("infinite supremum for a column outside J")
    return EpsilonTable(SK, cls.size, J, cols, eps, np.ones(cls.size), 0.0, k=geom.k,
                        assumption3=geom.assumption3)


def sk_apex_cut(geom: SkGeometry) -> LinearCut:
    """sum_j x_j / lambda*_j >= 1, the intersection cut of S_k from the apex.

    Only meaningful when every missing ray recedes into S_k, so the apex is
    interior to S_k relative to the cone and all lambda* are positive.
    """
    if geom.assumption3 or np.any(geom.lambda_star <= 0):
        raise PreconditionError("apex lies on the boundary of S_k; no apex cut")
    return LinearCut(_recip(geom.lambda_star), ">=", 1.0, note=f"apex cut of S_k, k={geom.k + 1}")


# -- cut wrappers ------------------------------------------------------------


def theorem4_cut(table: EpsilonTable, S: Iterable[int]) -> LinearCut:
    if table.context != GD:
        raise PreconditionError("expected a G_D table")
    return table.cut(S)


def theorem8_cut(table: EpsilonTable, S: Iterable[int]) -> LinearCut:
    if table.context != SK:
        raise PreconditionError("expected an S_k table")
    return table.cut(S)


# -- separation --------------------------------------------------------------


@dataclass(frozen=True)
class SeparationResult:
    S: tuple
    objective: float
    violation: float
    integrality_gap: float  # largest distance of an LP value from {0, 1}
    lp_solution: Optional[np.ndarray] = None


def separation_lp(table: EpsilonTable, x) -> tuple[LpProblem, dict]:
    """The mixing-set LP whose optimum is max_S of the cut left-hand side.

    Variables are z_i (i in M) and y[i, j] for i = 0..|M|, one block per
    column j: y_0j = 1, y_ij + z_pi_j(i) <= 1, y_ij <= y_{i-1,j}, all >= 0.
    With no columns the z_i are capped at 1 so the LP stays bounded.
    """
    x = np.asarray(x, dtype=float)
    M = table.M
    m, nb = len(M), len(table.cols)
    nz = m
    ny = (m + 1) * nb
    nv = nz + ny
    yid = lambda i, c: nz + c * (m + 1) + i
    c = np.zeros(nv)
    for r, i in enumerate(M):
        c[r] = table.left[i] * x[i]
    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    orders = []
    for cc, j in enumerate(table.cols):
        pi = table.order(j)
        orders.append(pi)
        e = [0.0] + [1.0 / table.eps_hat(p, j) if np.isfinite(table.eps_hat(p, j)) else 0.0 for p in pi]
        for i in range(1, m + 1):
            # - x_j e_i (y_{i-1} - y_i)
            c[yid(i - 1, cc)] -= x[j] * e[i]
            c[yid(i, cc)] += x[j] * e[i]
        row = np.zeros(nv)
        row[yid(0, cc)] = 1.0
        A_eq.append(row)
        b_eq.append(1.0)
        for i in range(1, m + 1):
            row = np.zeros(nv)
            row[yid(i, cc)] = 1.0
            row[M.index(pi[i - 1])] = 1.0
            A_ub.append(row)
            b_ub.append(1.0)
        for i in range(1, m + 1):
            row = np.zeros(nv)
            row[yid(i, cc)] = 1.0
            row[yid(i - 1, cc)] = -1.0
            A_ub.append(row)
            b_ub.append(0.0)
    upper = np.full(nv, INF)
    if nb == 0:
        upper[:nz] = 1.0
    prob = LpProblem.build(
        c,
        np.array(A_ub) if A_ub else None,
        np.array(b_ub) if b_ub else None,
        np.array(A_eq) if A_eq else None,
        np.array(b_eq) if b_eq else None,
        lower=0.0,
        upper=upper,
        maximize=True,
    )
    return prob, {"M": M, "orders": orders, "nz": nz}


def separate(table: EpsilonTable, x) -> SeparationResult:
    x = np.asarray(x, dtype=float)
    if np.any(x < -1e-9):
        raise PreconditionError("candidate must be nonnegative in nonbasic coordinates")
    prob, meta = separation_lp(table, x)
    if prob.n == 0:
        return SeparationResult((), 0.0, -table.rhs, 0.0, np.zeros(0))
    out = solve_or_raise(prob)
    z = out.x[: meta["nz"]]
    S = tuple(i for r, i in enumerate(meta["M"]) if z[r] > 0.5)
    gap = float(np.max(np.minimum(np.abs(out.x), np.abs(out.x - 1.0)), initial=0.0))
    obj = float(out.objective)
    return SeparationResult(S, obj, obj - table.rhs, gap, out.x)


def separate_theorem4(table: EpsilonTable, x) -> SeparationResult:
    if table.context != GD:
        raise PreconditionError("expected a G_D table")
    return separate(table, x)


def separate_theorem8(table: EpsilonTable, x) -> SeparationResult:
    if table.context != SK:
        raise PreconditionError("expected an S_k table")
    return separate(table, x)


# -- extended formulations ---------------------------------------------------


@dataclass(frozen=True, eq=False)
class ExtendedFormulation:
    """{(x, aux) : G (x, aux) >= h, x >= 0, aux >= lower} projecting onto the cut relaxation.

    Auxiliary layout: theta (|M| x nbar, row-major by position i = 1..|M|),
    v (same shape), lambda (nbar, free) and, only when there are no columns,
    w (|M|) standing in for the missing theta columns.
    """

    table: EpsilonTable
    G: np.ndarray
    h: np.ndarray
    n_x: int
    lower: np.ndarray
    counts: dict

    @property
    def n_aux(self) -> int:
        return self.G.shape[1] - self.n_x

    def contains(self, x, tol: float = 1e-9) -> bool:
        x = np.asarray(x, dtype=float)
        if np.any(x < -tol):
            return False
        n = self.n_x
        Gx, Ga = self.G[:, :n], self.G[:, n:]
        if self.n_aux == 0:
            return bool(np.all(Gx @ x >= self.h - tol))
        # Ga a >= h - Gx x, loosened by tol
        prob = LpProblem.build(np.zeros(self.n_aux), A_ge=Ga, b_ge=self.h - Gx @ x - tol, lower=self.lower[n:])
        return lp_solve(prob).status == "optimal"


def build_extended_formulation(table: EpsilonTable) -> ExtendedFormulation:
    M = table.M
    m, nb = len(M), len(table.cols)
    n = table.n
    use_w = nb == 0
    n_th = m * nb
    off_th, off_v = n, n + n_th
    off_l = off_v + n_th
    off_w = off_l + nb
    nv = off_w + (m if use_w else 0)
    th = lambda i, c: off_th + c * m + (i - 1)  # i = 1..m
    vv = lambda i, c: off_v + c * m + (i - 1)
    rows, rhs = [], []
    # dual objective cap: -(sum theta + sum lambda [+ sum w]) >= -rhs
    cap = np.zeros(nv)
    cap[off_th:off_v] = -1.0
    cap[off_l:off_l + nb] = -1.0
    if use_w:
        cap[off_w:] = -1.0
    rows.append(cap)
    rhs.append(-table.rhs)
    for c, j in enumerate(table.cols):
        pi = table.order(j)
        e = [0.0] + [float(_recip(table.eps_hat(p, j))) for p in pi] + [0.0]
        for i in range(0, m + 1):
            row = np.zeros(nv)
            if i == 0:
                row[off_l + c] = 1.0
            else:
                row[th(i, c)] = 1.0
                row[vv(i, c)] = 1.0
            if i + 1 <= m:
                row[vv(i + 1, c)] = -1.0
            row[j] = e[i + 1] - e[i]
            rows.append(row)
            rhs.append(0.0)
    for r, i in enumerate(M):
        row = np.zeros(nv)
        for c, j in enumerate(table.cols):
            row[th(table.order(j).index(i) + 1, c)] = 1.0
        if use_w:
            row[off_w + r] = 1.0
        row[i] = -table.left[i]
        rows.append(row)
        rhs.append(0.0)
    lower = np.zeros(nv)
    lower[off_l:off_l + nb] = -INF
    counts = {"M": m, "columns": nb, "constraints": len(rows)}
    return ExtendedFormulation(table, np.array(rows), np.array(rhs), n, lower, counts)


def build_extended_formulation_GD(table: EpsilonTable) -> ExtendedFormulation:
    if table.context != GD:
        raise PreconditionError("expected a G_D table")
    return build_extended_formulation(table)


def build_extended_formulation_Sk(table: EpsilonTable) -> ExtendedFormulation:
    if table.context != SK:
        raise PreconditionError("expected an S_k table")
    return build_extended_formulation(table)

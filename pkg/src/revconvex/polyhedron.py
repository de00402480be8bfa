"""Polyhedra in user and standard form, bases, and the simplicial cones they admit."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

import numpy as np

COND_CAP = 1e12
RANK_TOL = 1e-10
FEAS_TOL = 1e-7


class StructuralError(ValueError):
    """The polyhedron cannot be brought into a usable standard form."""


class BasisError(ValueError):
    """The column set is not a usable basis."""


class LiftingError(ValueError):
    """A nonbasic-space inequality has no expression in the original variables."""


@dataclass(frozen=True, eq=False)
class LinearSystem:
    """{y : A_ub y <= b_ub, A_eq y = b_eq, y >= lower} with lower entries 0 or -inf."""

    A_ub: np.ndarray
    b_ub: np.ndarray
    A_eq: np.ndarray
    b_eq: np.ndarray
    lower: np.ndarray

    @classmethod
    def make(cls, n: int, A_ub=None, b_ub=None, A_eq=None, b_eq=None, lower=0.0) -> "LinearSystem":
        def rows(a):
            if a is None:
                return np.zeros((0, n))
            return np.asarray(a, dtype=float).reshape(-1, n)

        def vec(b, k):
            return np.zeros(0) if b is None else np.asarray(b, dtype=float).reshape(k)

        A_ub, A_eq = rows(A_ub), rows(A_eq)
        return cls(
            A_ub,
            vec(b_ub, len(A_ub)),
            A_eq,
            vec(b_eq, len(A_eq)),
            np.broadcast_to(np.asarray(lower, dtype=float), (n,)).copy(),
        )

    @property
    def n(self) -> int:
        return self.lower.shape[0]

    def violation(self, y) -> float:
        y = np.asarray(y, dtype=float)
        parts = [0.0]
        if len(self.A_ub):
            parts.append(float(np.max(self.A_ub @ y - self.b_ub)))
        if len(self.A_eq):
            parts.append(float(np.max(np.abs(self.A_eq @ y - self.b_eq))))
        parts.append(float(np.max(self.lower - y, initial=0.0)))
        return max(parts)

    def member(self, y, tol: float = FEAS_TOL) -> bool:
        return self.violation(y) <= tol

    def member_many(self, Y: np.ndarray, tol: float = FEAS_TOL) -> np.ndarray:
        Y = np.atleast_2d(Y)
        ok = np.all(Y >= self.lower - tol, axis=1)
        if len(self.A_ub):
            ok &= np.all(Y @ self.A_ub.T <= self.b_ub + tol, axis=1)
        if len(self.A_eq):
            ok &= np.all(np.abs(Y @ self.A_eq.T - self.b_eq) <= tol, axis=1)
        return ok

    def with_rows(self, A_ub=None, b_ub=None, A_eq=None, b_eq=None) -> "LinearSystem":
        n = self.n
        extra = LinearSystem.make(n, A_ub, b_ub, A_eq, b_eq, self.lower)
        return LinearSystem(
            np.vstack([self.A_ub, extra.A_ub]),
            np.concatenate([self.b_ub, extra.b_ub]),
            np.vstack([self.A_eq, extra.A_eq]),
            np.concatenate([self.b_eq, extra.b_eq]),
            self.lower,
        )

    def extend(self, k: int, lower=0.0) -> "LinearSystem":
        """Append k auxiliary variables that appear in no existing row."""
        pad = lambda a: np.hstack([a, np.zeros((a.shape[0], k))])
        lo = np.concatenate([self.lower, np.broadcast_to(np.asarray(lower, dtype=float), (k,))])
        return LinearSystem(pad(self.A_ub), self.b_ub, pad(self.A_eq), self.b_eq, lo)

    def ge_rows(self) -> tuple[np.ndarray, np.ndarray]:
        """All constraints, bounds included, as G y >= h."""
        n = self.n
        blocks = [-self.A_ub, self.A_eq, -self.A_eq]
        rhs = [-self.b_ub, self.b_eq, -self.b_eq]
        fin = np.flatnonzero(np.isfinite(self.lower))
        if fin.size:
            blocks.append(np.eye(n)[fin])
            rhs.append(self.lower[fin])
        return np.vstack([b.reshape(-1, n) for b in blocks]), np.concatenate(rhs)


@dataclass(frozen=True, eq=False)
class InequalitySystem:
    """{y : C y <= d,  y_i >= 0 where nonneg[i]}."""

    C: np.ndarray
    d: np.ndarray
    names: tuple
    nonneg: tuple

    @classmethod
    def make(cls, C, d, nonneg: Optional[Sequence[bool]] = None, names=None, n: Optional[int] = None):
        C = np.asarray(C, dtype=float)
        if n is None:
            n = C.shape[1] if C.ndim == 2 and C.size else len(nonneg or names or ())
        C = C.reshape(-1, n)
        d = np.asarray(d, dtype=float).reshape(-1)
        if C.shape[0] != d.shape[0]:
            raise StructuralError(f"{C.shape[0]} rows but {d.shape[0]} right-hand sides")
        nonneg = tuple(bool(v) for v in (nonneg if nonneg is not None else [True] * n))
        names = tuple(names) if names is not None else tuple(f"x{i + 1}" for i in range(n))
        if len(nonneg) != n or len(names) != n:
            raise StructuralError("sign flags and names must cover every variable")
        return cls(C, d, names, nonneg)

    @property
    def n(self) -> int:
        return self.C.shape[1]

    def as_linear_system(self) -> LinearSystem:
        lower = np.where(np.array(self.nonneg, dtype=bool), 0.0, -math.inf)
        return LinearSystem.make(self.n, self.C, self.d, lower=lower)


@dataclass(frozen=True)
class Column:
    kind: str  # "var" or "slack"
    index: int
    sign: float = 1.0
    split: bool = False


@dataclass(frozen=True, eq=False)
class StandardFormPolyhedron:
    A: np.ndarray
    b: np.ndarray
    columns: tuple
    n_orig: int
    source: Optional[InequalitySystem] = None

    def __post_init__(self):
        m, n = self.A.shape
        if m == 0:
            raise StructuralError("standard form needs at least one row; use the cone-only path")
        if self.b.shape != (m,) or not np.all(np.isfinite(self.b)):
            raise StructuralError("b must be a finite m-vector")
        if np.linalg.matrix_rank(self.A, tol=RANK_TOL * max(1.0, np.abs(self.A).max())) < m:
            raise StructuralError("A does not have full row rank")

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    def to_original(self) -> np.ndarray:
        """Matrix T with y = T z mapping standard-form points to original variables."""
        T = np.zeros((self.n_orig, self.n))
        for k, col in enumerate(self.columns):
            if col.kind == "var":
                T[col.index, k] = col.sign
        return T

    def original_system(self) -> LinearSystem:
        if self.source is not None:
            return self.source.as_linear_system()
        return LinearSystem.make(self.n, A_eq=self.A, b_eq=self.b, lower=0.0)

    def column_expression(self, k: int) -> tuple[np.ndarray, float]:
        """(a, c) with z_k = a @ y + c on the original feasible set."""
        col = self.columns[k]
        a = np.zeros(self.n_orig)
        if col.kind == "var":
            if col.split:
                raise LiftingError(f"column {k} is one half of a split free variable")
            a[col.index] = col.sign
            return a, 0.0
        src = self.source
        return -src.C[col.index].copy(), float(src.d[col.index])


def to_standard_form(sys: InequalitySystem) -> StandardFormPolyhedron:
    """Add one slack per row and split free variables into two nonnegative parts."""
    if sys.C.shape[0] == 0:
        raise StructuralError("no constraint rows; use the cone-only path")
    blocks, cols = [], []
    for i in range(sys.n):
        if sys.nonneg[i]:
            blocks.append(sys.C[:, [i]])
            cols.append(Column("var", i))
        else:
            blocks.append(sys.C[:, [i]])
            blocks.append(-sys.C[:, [i]])
            cols.append(Column("var", i, 1.0, split=True))
            cols.append(Column("var", i, -1.0, split=True))
    m = sys.C.shape[0]
    blocks.append(np.eye(m))
    cols.extend(Column("slack", r) for r in range(m))
    return StandardFormPolyhedron(np.hstack(blocks), sys.d.copy(), tuple(cols), sys.n, sys)


def standard_form(A, b) -> StandardFormPolyhedron:
    """A polyhedron given directly as {z >= 0 : A z = b}."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    cols = tuple(Column("var", k) for k in range(A.shape[1]))
    return StandardFormPolyhedron(A, np.asarray(b, dtype=float).reshape(-1), cols, A.shape[1])


@dataclass(frozen=True)
class Basis:
    B: tuple
    N: tuple

    @classmethod
    def of(cls, B: Sequence[int], n: int) -> "Basis":
        B = tuple(int(j) for j in B)
        if len(set(B)) != len(B) or any(j < 0 or j >= n for j in B):
            raise BasisError(f"invalid basic index set {B}")
        return cls(B, tuple(j for j in range(n) if j not in B))


def _basis_matrix(P: StandardFormPolyhedron, B: Basis) -> np.ndarray:
    if len(B.B) != P.m:
        raise BasisError(f"basis needs {P.m} columns, got {len(B.B)}")
    AB = P.A[:, list(B.B)]
    if np.linalg.cond(AB) > COND_CAP:
        raise BasisError(f"basis {B.B} is singular or ill-conditioned")
    return AB


def basic_solution(P: StandardFormPolyhedron, B: Basis) -> np.ndarray:
    AB = _basis_matrix(P, B)
    x = np.zeros(P.n)
    x[list(B.B)] = np.linalg.solve(AB, P.b)
    return x


@dataclass(frozen=True, eq=False)
class SimplicialCone:
    """Apex and one ray per nonbasic column, in standard-form coordinates.

    The original-variable view (``apex_y``, ``rays_y``) is what the convex
    body sees.  ``coord_map`` returns (L, l) with nonbasic coordinates
    u = L y + l, which is how cuts are lifted back to the user's variables.
    """

    apex: np.ndarray
    rays: np.ndarray  # n_std x |N|, column j is the ray of nonbasic[j]
    nonbasic: tuple
    basis: Optional[Basis] = None
    polyhedron: Optional[StandardFormPolyhedron] = None

    @property
    def size(self) -> int:
        return len(self.nonbasic)

    @property
    def apex_y(self) -> np.ndarray:
        if self.polyhedron is None:
            return self.apex
        return self.polyhedron.to_original() @ self.apex

    @property
    def rays_y(self) -> np.ndarray:
        if self.polyhedron is None:
            return self.rays
        return self.polyhedron.to_original() @ self.rays

    def point(self, u) -> np.ndarray:
        """Original-space point apex + sum_j u_j ray_j."""
        u = np.asarray(u, dtype=float)
        return self.apex_y + u @ self.rays_y.T if u.ndim == 2 else self.apex_y + self.rays_y @ u

    def coord_map(self) -> tuple[np.ndarray, np.ndarray]:
        if self.polyhedron is None:
            n = self.size
            return np.eye(n), np.zeros(n)
        P = self.polyhedron
        L = np.zeros((self.size, P.n_orig))
        l = np.zeros(self.size)
        try:
            for r, k in enumerate(self.nonbasic):
                L[r], l[r] = P.column_expression(k)
        except LiftingError:
            # A split free variable is nonbasic.  The ray map may still be
            # invertible, in which case u = R^{-1} (y - apex).
            R = self.rays_y
            if R.shape[0] != R.shape[1] or np.linalg.cond(R) > COND_CAP:
                raise
            L = np.linalg.inv(R)
            l = -L @ self.apex_y
        return L, l

    def coords(self, y) -> np.ndarray:
        L, l = self.coord_map()
        y = np.asarray(y, dtype=float)
        return y @ L.T + l if y.ndim == 2 else L @ y + l

    def original_system(self) -> LinearSystem:
        if self.polyhedron is None:
            return LinearSystem.make(self.size, lower=0.0)
        return self.polyhedron.original_system()

    def as_system(self) -> LinearSystem:
        """P^B itself in original variables: {y : L y + l >= 0}, plus the affine hull."""
        L, l = self.coord_map()
        n = self.apex_y.shape[0]
        R = self.rays_y
        if R.shape[1] < n:
            _, _, Vt = np.linalg.svd(R.T)
            Z = Vt[R.shape[1]:]
            return LinearSystem.make(n, -L, l, Z, Z @ self.apex_y, lower=-math.inf)
        return LinearSystem.make(n, -L, l, lower=-math.inf)

    def standard_system(self) -> LinearSystem:
        """P over standard-form columns; nonbasic coordinates are columns ``nonbasic``."""
        if self.polyhedron is None:
            return LinearSystem.make(self.size, lower=0.0)
        P = self.polyhedron
        return LinearSystem.make(P.n, A_eq=P.A, b_eq=P.b, lower=0.0)

    def embed(self, coef) -> np.ndarray:
        """Place nonbasic-space coefficients into a standard-form row."""
        row = np.zeros(self.standard_system().n)
        row[list(self.nonbasic)] = coef
        return row

    def label(self, r: int) -> int:
        """One-based column number of the r-th nonbasic index."""
        return int(self.nonbasic[r]) + 1


def cone_rays(P: StandardFormPolyhedron, B: Basis) -> SimplicialCone:
    AB = _basis_matrix(P, B)
    abar = np.linalg.solve(AB, P.A[:, list(B.N)])
    rays = np.zeros((P.n, len(B.N)))
    for r, j in enumerate(B.N):
        rays[list(B.B), r] = -abar[:, r]
        rays[j, r] = 1.0
    return SimplicialCone(basic_solution(P, B), rays, B.N, B, P)


def orthant_cone(n: int) -> SimplicialCone:
    """The cone-only path for P = R^n_+: apex 0 and unit rays."""
    return SimplicialCone(np.zeros(n), np.eye(n), tuple(range(n)))


def enumerate_bases(P: StandardFormPolyhedron, limit: int) -> Iterator[Basis]:
    if limit < 1:
        raise ValueError("limit must be at least 1")
    found = 0
    for B in itertools.combinations(range(P.n), P.m):
        AB = P.A[:, list(B)]
        if np.linalg.cond(AB) > COND_CAP:
            continue
        yield Basis.of(B, P.n)
        found += 1
        if found >= limit:
            return


@dataclass(frozen=True)
class LinearCut:
    """coef @ v (sense) rhs, with v the nonbasic or the original coordinates."""

    coef: np.ndarray
    sense: str  # "<=" or ">="
    rhs: float
    space: str = "nonbasic"
    note: str = ""

    def value(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        return v @ self.coef

    def violation(self, v) -> np.ndarray:
        """Positive where the inequality fails."""
        val = self.value(v)
        return val - self.rhs if self.sense == "<=" else self.rhs - val

    def satisfied(self, v, tol: float = FEAS_TOL):
        return self.violation(v) <= tol

    @property
    def trivial(self) -> bool:
        return not np.any(self.coef)

    def as_le(self) -> tuple[np.ndarray, float]:
        if self.sense == "<=":
            return self.coef, self.rhs
        return -self.coef, -self.rhs


def lift_cut(cut: LinearCut, cone: SimplicialCone) -> LinearCut:
    """Rewrite a nonbasic-space cut over the original variables."""
    if cut.space != "nonbasic":
        raise LiftingError("cut is already in original space")
    if cut.coef.shape != (cone.size,):
        raise LiftingError("cut must have one coefficient per nonbasic index")
    if cut.trivial:
        n = cone.apex_y.shape[0]
        return LinearCut(np.zeros(n), cut.sense, cut.rhs, "original", cut.note)
    L, l = cone.coord_map()
    nz = np.flatnonzero(cut.coef)
    alpha = L[nz].T @ cut.coef[nz]
    beta = cut.rhs - float(cut.coef[nz] @ l[nz])
    return LinearCut(alpha, cut.sense, beta, "original", cut.note)

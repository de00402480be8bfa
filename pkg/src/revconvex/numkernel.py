"""Dense linear programming kernel with optimality and infeasibility certificates.

The solver is a two-phase tableau simplex.  Every outcome carries enough
information to be checked independently: primal and dual solutions on
optimality, a Farkas multiplier vector on infeasibility, and an improving
ray on unboundedness.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

log = logging.getLogger(__name__)

LE, EQ, GE = "<=", "=", ">="
_SENSES = (LE, EQ, GE)


class LpError(Exception):
    """Base class for LP kernel errors."""


class LpInputError(LpError, ValueError):
    """Dimension mismatch or non-finite data."""


class SolverFailure(LpError):
    """The simplex could not reach a conclusive status."""


@dataclass(frozen=True)
class Tolerances:
    feas: float = 1e-7
    gap: float = 1e-7
    pivot: float = 1e-9
    max_iter: int = 20000
    degeneracy_limit: int = 50


DEFAULT_TOL = Tolerances()


def _as_matrix(a, cols: int) -> np.ndarray:
    if a is None:
        return np.zeros((0, cols))
    a = np.asarray(a, dtype=float)
    if a.ndim == 1:
        a = a.reshape(1, -1) if a.size else np.zeros((0, cols))
    return a


@dataclass(frozen=True)
class LpProblem:
    """min (or max) c @ x  s.t.  A[i] @ x  (senses[i])  rhs[i],  lower <= x <= upper."""

    c: np.ndarray
    A: np.ndarray
    senses: tuple
    rhs: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    maximize: bool = False

    def __post_init__(self):
        n = self.c.shape[0]
        if n == 0:
            raise LpInputError("problem has no variables")
        if self.A.shape != (len(self.senses), n) or self.rhs.shape != (len(self.senses),):
            raise LpInputError(
                f"inconsistent shapes: c {self.c.shape}, A {self.A.shape}, "
                f"rhs {self.rhs.shape}, {len(self.senses)} senses"
            )
        if self.lower.shape != (n,) or self.upper.shape != (n,):
            raise LpInputError("bound vectors must match the number of variables")
        if any(s not in _SENSES for s in self.senses):
            raise LpInputError(f"unknown constraint sense in {self.senses}")
        if not (np.all(np.isfinite(self.c)) and np.all(np.isfinite(self.A)) and np.all(np.isfinite(self.rhs))):
            raise LpInputError("objective and constraint data must be finite")
        if np.any(np.isnan(self.lower)) or np.any(np.isnan(self.upper)):
            raise LpInputError("bounds must not be NaN")
        if np.any(self.lower > self.upper):
            raise LpInputError("lower bound exceeds upper bound")
        if np.any(self.lower == math.inf) or np.any(self.upper == -math.inf):
            raise LpInputError("bounds must admit a finite value")

    @property
    def n(self) -> int:
        return self.c.shape[0]

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @classmethod
    def build(
        cls,
        c,
        A_ub=None,
        b_ub=None,
        A_eq=None,
        b_eq=None,
        A_ge=None,
        b_ge=None,
        lower=0.0,
        upper=math.inf,
        maximize: bool = False,
    ) -> "LpProblem":
        c = np.asarray(c, dtype=float).ravel()
        n = c.shape[0]
        blocks, senses, rhs = [], [], []
        for mat, vec, sense in ((A_ub, b_ub, LE), (A_eq, b_eq, EQ), (A_ge, b_ge, GE)):
            mat = _as_matrix(mat, n)
            vec = np.zeros(0) if vec is None else np.asarray(vec, dtype=float).ravel()
            if mat.shape[0] != vec.shape[0] or (mat.shape[0] and mat.shape[1] != n):
                raise LpInputError(f"block {sense}: matrix {mat.shape} vs rhs {vec.shape}, n={n}")
            blocks.append(mat.reshape(-1, n))
            senses.extend([sense] * mat.shape[0])
            rhs.append(vec)
        lo = np.broadcast_to(np.asarray(lower, dtype=float), (n,)).copy()
        hi = np.broadcast_to(np.asarray(upper, dtype=float), (n,)).copy()
        return cls(c, np.vstack(blocks), tuple(senses), np.concatenate(rhs), lo, hi, maximize)


@dataclass(frozen=True)
class LpOutcome:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: Optional[np.ndarray] = None
    y: Optional[np.ndarray] = None
    objective: float = math.nan
    certificate: Optional[np.ndarray] = None
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


class _Tableau:
    """Dense tableau B^-1 [A | b] with an explicit basis list."""

    def __init__(self, A: np.ndarray, b: np.ndarray, basis: list[int], tol: Tolerances):
        m, n = A.shape
        self.T = np.hstack([A, b.reshape(-1, 1)])
        self.basis = list(basis)
        self.m, self.n = m, n
        self.tol = tol
        self.iterations = 0

    def reduced_costs(self, cost: np.ndarray) -> np.ndarray:
        cb = cost[self.basis]
        return cost - cb @ self.T[:, : self.n]

    def pivot(self, r: int, q: int) -> None:
        T = self.T
        T[r] /= T[r, q]
        col = T[:, q].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r])
        self.basis[r] = q
        self.iterations += 1

    def run(self, cost: np.ndarray, allowed: np.ndarray):
        """Minimise cost over the current tableau.  Returns ("optimal", None) or ("unbounded", q)."""
        tol = self.tol
        bland = False
        degenerate_run = 0
        while True:
            if self.iterations > tol.max_iter:
                raise SolverFailure(f"iteration cap {tol.max_iter} reached")
            d = self.reduced_costs(cost)
            d[~allowed] = 0.0
            d[self.basis] = 0.0
            candidates = np.flatnonzero(d < -tol.feas)
            if candidates.size == 0:
                return "optimal", None
            q = int(candidates[0]) if bland else int(candidates[np.argmin(d[candidates])])
            col = self.T[:, q]
            rows = np.flatnonzero(col > tol.pivot)
            if rows.size == 0:
                return "unbounded", q
            ratios = self.T[rows, -1] / col[rows]
            best = ratios.min()
            ties = rows[ratios <= best + 1e-12 * max(1.0, abs(best))]
            if bland:
                r = int(min(ties, key=lambda i: self.basis[i]))
            else:
                r = int(ties[np.argmax(col[ties])])
            if best <= tol.feas:
                degenerate_run += 1
                if degenerate_run > tol.degeneracy_limit and not bland:
                    log.debug("switching to Bland's rule after %d degenerate pivots", degenerate_run)
                    bland = True
            else:
                degenerate_run = 0
            self.pivot(r, q)


def lp_solve(problem: LpProblem, tol: Tolerances = DEFAULT_TOL) -> LpOutcome:
    """Solve an LP with the two-phase simplex and attach certificates."""
    n = problem.n
    lo, hi = problem.lower, problem.upper

    # Variable substitution x = shift + M @ xs with xs >= 0.
    cols, shift = [], np.zeros(n)
    bound_rows = []  # (column index in xs, width)
    for j in range(n):
        if math.isfinite(lo[j]):
            shift[j] = lo[j]
            cols.append((j, 1.0))
            if math.isfinite(hi[j]):
                bound_rows.append((len(cols) - 1, hi[j] - lo[j]))
        elif math.isfinite(hi[j]):
            shift[j] = hi[j]
            cols.append((j, -1.0))
        else:
            cols.append((j, 1.0))
            cols.append((j, -1.0))
    ns = len(cols)
    M = np.zeros((n, ns))
    for k, (j, s) in enumerate(cols):
        M[j, k] = s

    A_s = problem.A @ M
    b_s = problem.rhs - problem.A @ shift
    senses = list(problem.senses)
    if bound_rows:
        extra = np.zeros((len(bound_rows), ns))
        for i, (k, _) in enumerate(bound_rows):
            extra[i, k] = 1.0
        A_s = np.vstack([A_s, extra])
        b_s = np.concatenate([b_s, [w for _, w in bound_rows]])
        senses += [LE] * len(bound_rows)
    m = A_s.shape[0]

    # Slack/surplus columns, then sign normalisation so that rhs >= 0.
    slack_cols = np.zeros((m, m))
    n_slack = 0
    slack_of_row = [-1] * m
    for i, s in enumerate(senses):
        if s != EQ:
            slack_cols[i, n_slack] = 1.0 if s == LE else -1.0
            slack_of_row[i] = n_slack
            n_slack += 1
    slack_cols = slack_cols[:, :n_slack]
    body = np.hstack([A_s, slack_cols])
    flip = np.where(b_s < 0, -1.0, 1.0)
    body = body * flip[:, None]
    rhs = b_s * flip

    # Initial basis: a slack with +1 after flipping, otherwise an artificial.
    n_real = ns + n_slack
    art_rows = []
    basis = [-1] * m
    for i in range(m):
        k = slack_of_row[i]
        if k >= 0 and body[i, ns + k] > 0:
            basis[i] = ns + k
        else:
            art_rows.append(i)
    n_art = len(art_rows)
    art = np.zeros((m, n_art))
    for a, i in enumerate(art_rows):
        art[i, a] = 1.0
        basis[i] = n_real + a
    full = np.hstack([body, art])
    # Columns forming the initial identity; B^-1 is read off them at the end.
    init_cols = np.array(basis)

    tab = _Tableau(full, rhs, basis, tol)
    total = n_real + n_art
    allowed = np.ones(total, dtype=bool)

    if n_art:
        c1 = np.zeros(total)
        c1[n_real:] = 1.0
        status, _ = tab.run(c1, allowed)
        w = float(c1[tab.basis] @ tab.T[:, -1])
        if w > tol.feas * max(1.0, np.abs(rhs).max(initial=0.0)):
            binv = tab.T[:, init_cols]
            y1 = c1[tab.basis] @ binv
            z = flip * y1
            cert = -z[: problem.m]
            norm = np.abs(cert).max(initial=0.0)
            if norm > 0:
                cert = cert / norm
            return LpOutcome("infeasible", certificate=cert, iterations=tab.iterations)
        # Drive zero-level artificials out of the basis where possible.
        for r in range(m):
            if tab.basis[r] >= n_real:
                row = tab.T[r, :n_real]
                nz = np.flatnonzero(np.abs(row) > tol.pivot)
                if nz.size:
                    tab.pivot(r, int(nz[np.argmax(np.abs(row[nz]))]))
        allowed[n_real:] = False

    sign = -1.0 if problem.maximize else 1.0
    c_s = np.zeros(total)
    c_s[:ns] = sign * (problem.c @ M)
    status, q = tab.run(c_s, allowed)

    xs = np.zeros(total)
    xs[tab.basis] = tab.T[:, -1]
    x = shift + M @ xs[:ns]

    if status == "unbounded":
        ds = np.zeros(total)
        ds[q] = 1.0
        ds[tab.basis] -= tab.T[:, q]
        ray = M @ ds[:ns]
        norm = np.abs(ray).max(initial=0.0)
        ray = ray / norm if norm > 0 else ray
        return LpOutcome("unbounded", x=x, certificate=ray, iterations=tab.iterations)

    binv = tab.T[:, init_cols]
    y_std = c_s[tab.basis] @ binv
    y = (flip * y_std)[: problem.m] * sign
    return LpOutcome(
        "optimal", x=x, y=y, objective=float(problem.c @ x), iterations=tab.iterations
    )


# ---------------------------------------------------------------------------
# Certificate checks.  These are used by the solver's own tests and by callers
# that want to audit an outcome without trusting the simplex.


def row_activity(problem: LpProblem, x: np.ndarray) -> np.ndarray:
    return problem.A @ x


def primal_residual(problem: LpProblem, x: np.ndarray) -> float:
    """Largest constraint or bound violation of x."""
    act = problem.A @ x - problem.rhs
    viol = [0.0]
    for s, a in zip(problem.senses, act):
        if s == LE:
            viol.append(a)
        elif s == GE:
            viol.append(-a)
        else:
            viol.append(abs(a))
    viol.append(float(np.max(problem.lower - x, initial=0.0)))
    viol.append(float(np.max(x - problem.upper, initial=0.0)))
    return float(max(viol))


def dual_objective(problem: LpProblem, y: np.ndarray, tol: float = 1e-7) -> float:
    """Lagrangian dual value for row multipliers y (y = d objective / d rhs).

    Reduced costs are assigned to whichever bound makes the bound term
    optimal.  A reduced cost pushing towards an infinite bound returns the
    corresponding infinity, signalling dual infeasibility.
    """
    d = problem.c - problem.A.T @ y
    if problem.maximize:
        d = -d
    total = float(problem.rhs @ y)
    bound_term = 0.0
    for dj, lj, uj in zip(d, problem.lower, problem.upper):
        if abs(dj) <= tol:
            continue
        bound = lj if dj > 0 else uj
        if not math.isfinite(bound):
            return -math.inf if not problem.maximize else math.inf
        bound_term += dj * bound
    return total + (bound_term if not problem.maximize else -bound_term)


def dual_sign_violation(problem: LpProblem, y: np.ndarray) -> float:
    """How far y is from the sign pattern required of optimal multipliers."""
    worst = 0.0
    for s, yi in zip(problem.senses, y):
        yi = -yi if problem.maximize else yi
        if s == LE:
            worst = max(worst, yi)
        elif s == GE:
            worst = max(worst, -yi)
    return worst


def farkas_gap(problem: LpProblem, y: np.ndarray) -> float:
    """Return min over the bound box of (A^T y) @ x minus y @ rhs.

    A valid infeasibility certificate has nonnegative multipliers on <= rows,
    nonpositive multipliers on >= rows, and a strictly positive gap: every
    feasible x would satisfy (A^T y) @ x <= y @ rhs, which the box rules out.
    Sign violations or an unbounded box minimum yield -inf.
    """
    for s, yi in zip(problem.senses, y):
        if (s == LE and yi < -1e-12) or (s == GE and yi > 1e-12):
            return -math.inf
    g = problem.A.T @ y
    box_min = 0.0
    for gj, lj, uj in zip(g, problem.lower, problem.upper):
        if abs(gj) <= 1e-12:
            continue
        bound = lj if gj > 0 else uj
        if not math.isfinite(bound):
            return -math.inf
        box_min += gj * bound
    return box_min - float(y @ problem.rhs)


def ray_violation(problem: LpProblem, d: np.ndarray) -> float:
    """Largest violation of the recession conditions for an improving ray d."""
    act = problem.A @ d
    worst = 0.0
    for s, a in zip(problem.senses, act):
        if s == LE:
            worst = max(worst, a)
        elif s == GE:
            worst = max(worst, -a)
        else:
            worst = max(worst, abs(a))
    for dj, lj, uj in zip(d, problem.lower, problem.upper):
        if math.isfinite(lj):
            worst = max(worst, -dj)
        if math.isfinite(uj):
            worst = max(worst, dj)
    return worst


@dataclass(frozen=True)
class FeasibilityResult:
    feasible: bool
    point: Optional[np.ndarray] = None
    certificate: Optional[np.ndarray] = None


def feasible_point(
    A_ub=None, b_ub=None, A_eq=None, b_eq=None, lower=0.0, upper=math.inf, n: Optional[int] = None,
    tol: Tolerances = DEFAULT_TOL,
) -> FeasibilityResult:
    """Find any point of {A_ub x <= b_ub, A_eq x = b_eq, lower <= x <= upper}."""
    if n is None:
        for mat in (A_ub, A_eq):
            if mat is not None and np.asarray(mat).size:
                n = np.asarray(mat, dtype=float).reshape(len(np.atleast_2d(mat)), -1).shape[1]
                break
        else:
            n = np.broadcast_shapes(np.shape(lower), np.shape(upper))[0]
    problem = LpProblem.build(np.zeros(n), A_ub, b_ub, A_eq, b_eq, lower=lower, upper=upper)
    out = lp_solve(problem, tol)
    if out.status == "infeasible":
        return FeasibilityResult(False, certificate=out.certificate)
    return FeasibilityResult(True, point=out.x)


def solve_or_raise(problem: LpProblem, tol: Tolerances = DEFAULT_TOL) -> LpOutcome:
    out = lp_solve(problem, tol)
    if out.status != "optimal":
        raise SolverFailure(f"expected an optimal LP, got {out.status}")
    return out

"""Problem instances: JSON parsing and the classification pipeline."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .classify import OUTSIDE, RayClassification, apex_location, classify_rays
from .convexbody import (
    STRICT_TOL,
    Ball,
    ConeOracle,
    ConvexBody,
    ConvexQuadratic,
    MinkowskiSumWithCone,
    SecondOrderBody,
    StrictHalfspaces,
)
from .polyhedron import (
    Basis,
    InequalitySystem,
    LinearSystem,
    SimplicialCone,
    StandardFormPolyhedron,
    cone_rays,
    enumerate_bases,
    orthant_cone,
    standard_form,
    to_standard_form,
)

BASIS_SCAN = 10_000


class SchemaError(ValueError):
    """The instance document is malformed or dimensionally inconsistent."""


def _matrix(obj, name: str, cols: Optional[int] = None) -> np.ndarray:
    try:
        a = np.asarray(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{name}: not a numeric matrix") from exc
    if a.size == 0:
        return np.zeros((0, cols or 0))
    if a.ndim != 2:
        raise SchemaError(f"{name}: expected a list of rows")
    if cols is not None and a.shape[1] != cols:
        raise SchemaError(f"{name}: expected {cols} columns, got {a.shape[1]}")
    if not np.all(np.isfinite(a)):
        raise SchemaError(f"{name}: entries must be finite")
    return a


def _vector(obj, name: str, length: Optional[int] = None) -> np.ndarray:
    try:
        v = np.asarray(obj, dtype=float).reshape(-1)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{name}: not a numeric vector") from exc
    if length is not None and v.shape[0] != length:
        raise SchemaError(f"{name}: expected length {length}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise SchemaError(f"{name}: entries must be finite")
    return v


def _require(d: dict, key: str, where: str):
    if not isinstance(d, dict) or key not in d:
        raise SchemaError(f"{where}: missing '{key}'")
    return d[key]


@dataclass
class Instance:
    """A polyhedron P, an open convex body C and optional basis/candidate.

    ``standard`` is None on the cone-only path (P is the nonnegative orthant
    given with no rows), where the cone is the orthant itself.
    """

    n: int
    system: LinearSystem
    body: ConvexBody
    standard: Optional[StandardFormPolyhedron] = None
    basis: Optional[tuple] = None  # zero-based standard-form columns
    candidate: Optional[np.ndarray] = None
    options: dict = field(default_factory=dict)
    source: Optional[str] = None

    @property
    def tol_strict(self) -> float:
        return float(self.options.get("tol_strict", STRICT_TOL))

    @property
    def tol_feas(self) -> float:
        return float(self.options.get("tol_feas", 1e-7))

    @property
    def seed(self) -> int:
        return int(self.options.get("seed", 0))

    @property
    def box(self) -> np.ndarray:
        if "box" in self.options:
            b = np.asarray(self.options["box"], dtype=float)
            if b.shape != (self.n, 2):
                raise SchemaError(f"options.box: expected {self.n} [lo, hi] pairs")
            return b
        return np.tile([0.0, 5.0], (self.n, 1))

    def cone(self) -> SimplicialCone:
        if self.standard is None:
            return orthant_cone(self.n)
        if self.basis is not None:
            return cone_rays(self.standard, Basis.of(self.basis, self.standard.n))
        first = None
        for B in enumerate_bases(self.standard, BASIS_SCAN):
            cone = cone_rays(self.standard, B)
            if first is None:
                first = cone
            if apex_location(self.body, cone.apex_y, self.tol_strict) == OUTSIDE:
                return cone
        if first is None:
            raise SchemaError("the polyhedron has no basis")
        return first

    def classify(self, basis: Optional[tuple] = None) -> RayClassification:
        inst = self if basis is None else self.with_basis(basis)
        return classify_rays(inst.cone(), inst.body, inst.tol_strict)

    def with_basis(self, basis) -> "Instance":
        if self.standard is None:
            raise SchemaError("the cone-only path has a single basis")
        basis = tuple(int(b) for b in basis)
        if len(basis) != self.standard.m or not all(0 <= b < self.standard.n for b in basis):
            raise SchemaError(f"basis needs {self.standard.m} distinct columns in 1..{self.standard.n}")
        return Instance(self.n, self.system, self.body, self.standard, basis, self.candidate, self.options, self.source)

    def in_reverse_convex(self, y, margin: Optional[float] = None) -> bool:
        margin = self.tol_strict if margin is None else margin
        return self.system.member(y, self.tol_feas) and self.body.level(y) > margin


# -- parsing -------------------------------------------------------------------


def parse_body(entry: dict, n: int) -> ConvexBody:
    kind = _require(entry, "kind", "body")
    hint = entry.get("interior_hint")
    hint = None if hint is None else _vector(hint, "body.interior_hint", n)
    try:
        if kind == "ball":
            return Ball(_vector(_require(entry, "center", "body"), "body.center", n),
                        float(_require(entry, "radius", "body")), hint)
        if kind == "quadratic":
            Q = _matrix(_require(entry, "Q", "body"), "body.Q", n)
            return ConvexQuadratic(Q, _vector(_require(entry, "c", "body"), "body.c", n),
                                   float(entry.get("d", 0.0)), hint)
        if kind == "halfspaces":
            A = _matrix(_require(entry, "A", "body"), "body.A", n)
            return StrictHalfspaces(A, _vector(_require(entry, "beta", "body"), "body.beta", A.shape[0]), hint)
        if kind == "soc":
            g = _vector(_require(entry, "g", "body"), "body.g")
            F = _matrix(_require(entry, "F", "body"), "body.F", n)
            return SecondOrderBody(F, g, _vector(_require(entry, "h", "body"), "body.h", n),
                                   float(_require(entry, "e", "body")), hint)
        if kind == "minkowski_cone":
            base = parse_body(_require(entry, "base", "body"), n)
            gens = _matrix(_require(entry, "generators", "body"), "body.generators", n)
            return MinkowskiSumWithCone(base, ConeOracle.from_generators(gens, n), hint)
    except SchemaError:
        raise
    except (ValueError, TypeError) as exc:
        raise SchemaError(f"body: {exc}") from exc
    raise SchemaError(f"body.kind: unknown kind '{kind}'")


def parse_instance(doc: dict, source: Optional[str] = None) -> Instance:
    if not isinstance(doc, dict):
        raise SchemaError("instance must be a JSON object")
    poly = _require(doc, "polyhedron", "instance")
    standard = None
    if isinstance(poly, dict) and "ineq" in poly:
        entry = poly["ineq"]
        nonneg = entry.get("nonneg")
        C = np.asarray(entry.get("C", []), dtype=float)
        if nonneg is None and C.size == 0:
            raise SchemaError("polyhedron.ineq: give C or nonneg")
        n = len(nonneg) if nonneg is not None else C.shape[1]
        C = _matrix(entry.get("C", []), "polyhedron.ineq.C", n)
        d = _vector(entry.get("d", []), "polyhedron.ineq.d", C.shape[0])
        if nonneg is None:
            nonneg = [True] * n
        if len(nonneg) != n or not all(isinstance(b, bool) for b in nonneg):
            raise SchemaError(f"polyhedron.ineq.nonneg: expected {n} booleans")
        ineq = InequalitySystem.make(C, d, nonneg, n=n)
        system = ineq.as_linear_system()
        if C.shape[0]:
            standard = to_standard_form(ineq)
        elif not all(nonneg):
            raise SchemaError("polyhedron.ineq: free variables need at least one row")
    elif isinstance(poly, dict) and "standard" in poly:
        entry = poly["standard"]
        A = _matrix(_require(entry, "A", "polyhedron.standard"), "polyhedron.standard.A")
        b = _vector(_require(entry, "b", "polyhedron.standard"), "polyhedron.standard.b", A.shape[0])
        n = A.shape[1]
        system = LinearSystem.make(n, A_eq=A, b_eq=b, lower=0.0)
        try:
            standard = standard_form(A, b)
        except ValueError as exc:
            raise SchemaError(f"polyhedron.standard: {exc}") from exc
    else:
        raise SchemaError("polyhedron: expected 'ineq' or 'standard'")
    body = parse_body(_require(doc, "body", "instance"), n)
    basis = doc.get("basis")
    if basis is not None:
        if standard is None:
            raise SchemaError("basis: the cone-only path takes no basis")
        try:
            basis = tuple(int(j) - 1 for j in basis)
        except (TypeError, ValueError) as exc:
            raise SchemaError("basis: expected one-based column indices") from exc
        if len(basis) != standard.m or len(set(basis)) != len(basis) or not all(0 <= j < standard.n for j in basis):
            raise SchemaError(f"basis: need {standard.m} distinct columns in 1..{standard.n}")
    cand = doc.get("candidate")
    cand = None if cand is None else _vector(cand, "candidate", n)
    options = doc.get("options", {})
    if not isinstance(options, dict):
        raise SchemaError("options must be an object")
    return Instance(n, system, body, standard, basis, cand, dict(options), source)


def load_instance(path) -> Instance:
    p = Path(path)
    try:
        doc = json.loads(p.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"{p}: {exc}") from exc
    return parse_instance(doc, str(p))


def fixture_path(name: str) -> Path:
    return Path(__file__).parent / "fixtures" / name


def load_fixture(name: str) -> Instance:
    if not name.endswith(".json"):
        name += ".json"
    return load_instance(fixture_path(name))


def finite_or_none(x: float):
    """JSON has no infinity; report +inf as the string "inf"."""
    x = float(x)
    if math.isfinite(x):
        return x
    return "inf" if x > 0 else "-inf"

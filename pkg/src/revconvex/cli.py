"""revconvex command line: analyze, cuts, separate, verify, plotdata.

Exit codes: 0 success, 1 a verification check failed, 2 malformed input,
3 numerical failure, 4 an assumption or precondition does not hold,
5 plot data requested for a dimension other than 2.
"""

from __future__ import annotations

import argparse
import itertools
import json
import math
import sys
import warnings
from pathlib import Path
from typing import Optional

import numpy as np

from . import verify as V
from .classify import BOUNDARY, N0, N1, N2, OUTSIDE, check_assumption1, check_assumption2
from .convexbody import CapabilityError, OracleError, PreconditionError
from .cuts_basic import (
    ValidityError,
    external_intersection_cut,
    standard_intersection_cut,
    two_term_disjunction,
    with_emptiness,
)
from .cuts_recession import (
    GD,
    build_epsilon_table_GD,
    build_epsilon_table_Sk,
    build_extended_formulation,
    build_sk_geometry,
    separate,
    sk_apex_cut,
)
from .disjunction_cglp import EmptyRegionError, boundary_case, build_multiterm, build_two_term, cglp_separate
from .instance import Instance, SchemaError, finite_or_none, load_instance
from .numkernel import LpError
from .polyhedron import LiftingError, LinearCut, StructuralError, BasisError, lift_cut

EXIT_OK, EXIT_FAIL, EXIT_SCHEMA, EXIT_NUMERIC, EXIT_ASSUMPTION, EXIT_DIM = 0, 1, 2, 3, 4, 5
MODES = ("standard", "two-term", "external", "theorem4", "theorem8", "multiterm")
SUITES = ("all", "sampling", "ef", "separation", "supermodular")
ENUM_LIMIT = 12


class CliError(Exception):
    def __init__(self, code: int, kind: str, message: str, **extra):
        super().__init__(message)
        self.code, self.kind, self.extra = code, kind, extra


# -- serialization ------------------------------------------------------------


def _num(x):
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_num(v) for v in np.asarray(x, dtype=float).tolist()]
    x = float(x)
    if not math.isfinite(x):
        return finite_or_none(x)
    return round(x, 12) + 0.0


def _cut_json(cut: Optional[LinearCut]):
    if cut is None:
        return None
    return {"coef": _num(cut.coef), "sense": cut.sense, "rhs": _num(cut.rhs)}


def _labels(inst: Instance, cls, positions) -> list:
    return [cls.cone.label(j) for j in positions]


def _basis_json(cls):
    B = cls.cone.basis
    return None if B is None else [j + 1 for j in B.B]


def _cut_record(inst, cls, cut: LinearCut, family: str, mode: str, **prov) -> dict:
    rec = {"family": family, "note": cut.note, "nonbasic": _cut_json(cut) if cut.space == "nonbasic" else None}
    if cut.space == "original":
        rec["original"] = _cut_json(cut)
    else:
        try:
            rec["original"] = _cut_json(lift_cut(cut, cls.cone))
        except LiftingError as exc:
            rec["original"] = None
            rec["lift_error"] = str(exc)
    rec["provenance"] = {"basis": _basis_json(cls), "mode": mode, **prov}
    return rec


def _table_prov(cls, table, S) -> dict:
    S = tuple(S)
    eps = table.eps_of_set(S)
    return {
        "context": table.context,
        "k": None if table.k is None else cls.cone.label(table.k),
        "S": _labels(None, cls, S),
        "eps": {str(cls.cone.label(j)): _num(e) for j, e in zip(table.cols, eps)},
    }


def _emit(obj, stream=None):
    stream = stream or sys.stdout
    stream.write(json.dumps(obj, indent=2, sort_keys=False) + "\n")


# -- commands --------------------------------------------------------------------


def _instance(args) -> Instance:
    inst = load_instance(args.instance)
    if args.tol_feas is not None:
        inst.options["tol_feas"] = args.tol_feas
    if args.tol_strict is not None:
        inst.options["tol_strict"] = args.tol_strict
    if getattr(args, "seed", None) is not None:
        inst.options["seed"] = args.seed
    if args.basis:
        try:
            B = tuple(int(t) - 1 for t in args.basis.split(","))
        except ValueError as exc:
            raise SchemaError("--basis: expected comma-separated one-based columns") from exc
        inst = inst.with_basis(B)
    return inst


def cmd_analyze(args) -> int:
    inst = _instance(args)
    cls = inst.classify()
    a1 = check_assumption1(cls)
    try:
        a2 = check_assumption2(cls.cone, inst.body)
        a2_json = {"holds": a2.holds, "witness": _num(a2.witness) if a2.witness is not None else None,
                   "detail": a2.detail}
    except CapabilityError as exc:
        a2_json = {"holds": None, "skipped": str(exc)}
    _emit({
        "instance": inst.source,
        "basis": _basis_json(cls),
        "apex": _num(cls.cone.apex_y),
        "apex_location": cls.apex,
        "rays": {str(cls.cone.label(j)): _num(cls.ray(j)) for j in range(cls.size)},
        "lambda_table": [
            {**row, "lambda1": _num(row["lambda1"]) if row["class"] != N0 else None,
             "lambda2": _num(row["lambda2"]) if row["class"] != N0 else None}
            for row in cls.table()
        ],
        "partition": {tag: _labels(inst, cls, cls.positions(tag)) for tag in (N0, N1, N2)},
        "assumption1": {"holds": a1.holds,
                        "witness": None if a1.witness is None else cls.cone.label(a1.witness),
                        "detail": a1.detail},
        "assumption2": a2_json,
    })
    return EXIT_OK


def _family_cuts(inst, cls, table, mode, term=None) -> list:
    if len(table.M) > ENUM_LIMIT:
        raise CliError(EXIT_ASSUMPTION, "capability", f"|M| = {len(table.M)} is too large to list every cut")
    recs = []
    for r in range(1, len(table.M) + 1):
        for S in itertools.combinations(table.M, r):
            fam = "G_D" if table.context == GD else "S_k"
            rec = _cut_record(inst, cls, table.cut(S), fam, mode, **_table_prov(cls, table, S))
            if term:
                rec["term"] = term
            recs.append(rec)
    return recs


def collect_cuts(inst: Instance, cls, mode: str) -> dict:
    """Cuts of one mode as JSON-ready records; raises CliError on precondition failures."""
    out = {"mode": mode, "basis": _basis_json(cls), "apex_location": cls.apex, "cuts": [], "reason": None}
    if mode == "standard":
        cut = standard_intersection_cut(cls)
        out["cuts"].append(_cut_record(inst, cls, cut, "standard", mode))
    elif mode == "two-term":
        if cls.apex != OUTSIDE:
            raise CliError(EXIT_ASSUMPTION, "precondition", f"apex is {cls.apex}")
        disj = with_emptiness(cls, two_term_disjunction(cls))
        for side, cut, st in (("left", disj.left, disj.left_status), ("right", disj.right, disj.right_status)):
            rec = _cut_record(inst, cls, cut, "two-term", mode, side=side)
            rec["side_state"] = st.state
            rec["symbolic"] = st.symbolic
            out["cuts"].append(rec)
    elif mode == "external":
        res = external_intersection_cut(cls)
        if res.cut is None:
            out["reason"] = res.reason
        else:
            rec = _cut_record(inst, cls, res.cut, "external", mode, side=res.side)
            out["cuts"].append(rec)
            if res.lifted is None:
                out["reason"] = res.reason
    elif mode == "theorem4":
        table = build_epsilon_table_GD(cls)
        out["M"] = _labels(inst, cls, table.M)
        out["cuts"] = _family_cuts(inst, cls, table, mode)
        if not out["cuts"]:
            out["reason"] = "the M-set is empty"
    elif mode == "theorem8":
        for k in cls.N2:
            geom = build_sk_geometry(cls, k)
            table = build_epsilon_table_Sk(cls, geom)
            label = f"S{cls.cone.label(k)}"
            out.setdefault("M_sets", {})[label] = _labels(inst, cls, table.M)
            out["cuts"].extend(_family_cuts(inst, cls, table, mode, term=label))
            if not geom.assumption3:
                rec = _cut_record(inst, cls, sk_apex_cut(geom), "S_k apex", mode, k=cls.cone.label(k),
                                  lambda_star=_num(geom.lambda_star))
                rec["term"] = label
                out["cuts"].append(rec)
        if not out["cuts"]:
            out["reason"] = "no crossing rays or empty M-sets"
    elif mode == "multiterm":
        rep = build_multiterm(cls)
        out["notes"] = list(rep.notes)
        out["terms"] = []
        for t in rep.terms:
            entry = {"label": t.label, "cuts": []}
            table = rep.tables.get(t.label)
            if t.point is not None:
                entry["point"] = _num(t.point)
            if t.label in rep.apex_cuts:
                entry["cuts"].append(_cut_record(inst, cls, rep.apex_cuts[t.label], "S_k apex", mode, term=t.label))
            if table is not None:
                entry["M"] = _labels(inst, cls, table.M)
                entry["cuts"].extend(_family_cuts(inst, cls, table, mode, term=t.label))
            out["terms"].append(entry)
            out["cuts"].extend(entry["cuts"])
    else:
        raise SchemaError(f"unknown mode {mode}")
    return out


def cmd_cuts(args) -> int:
    inst = _instance(args)
    cls = inst.classify()
    _emit(collect_cuts(inst, cls, args.mode))
    return EXIT_OK


def disjunctions(inst: Instance, cls) -> dict:
    """Every disjunction that applies to this basis, as term lists."""
    out = {}
    if cls.apex == OUTSIDE:
        if check_assumption1(cls):
            out["two-term"] = build_two_term(cls)
        try:
            out["multiterm"] = build_multiterm(cls).terms
        except CapabilityError:
            pass
    else:
        if check_assumption1(cls):
            out["boundary" if cls.apex == BOUNDARY else "standard"] = boundary_case(cls)
        try:
            out["multiterm"] = build_multiterm(cls).terms
        except (CapabilityError, ValidityError):
            pass
    return out


def _separation_json(cls, table, x_hat) -> dict:
    u = cls.cone.coords(x_hat)
    res = separate(table, u)
    rec = {"S": [cls.cone.label(i) for i in res.S], "objective": _num(res.objective),
           "violation": _num(res.violation), "integrality_gap": _num(res.integrality_gap), "M": len(table.M)}
    if len(table.M) <= V.BRUTE_LIMIT:
        S, val = V.brute_force_separation(table, u)
        rec["brute_force"] = {"S": [cls.cone.label(i) for i in S], "objective": _num(val)}
    return rec


def cmd_separate(args) -> int:
    inst = _instance(args)
    if inst.candidate is None:
        raise SchemaError("separate needs a 'candidate' in the instance file")
    cls = inst.classify()
    x_hat = inst.candidate
    out = {"candidate": _num(x_hat), "basis": _basis_json(cls), "in_P": bool(inst.system.member(x_hat, inst.tol_feas)),
           "in_C": bool(inst.body.level(x_hat) < -inst.tol_strict), "families": {}, "cglp": {}}
    u = cls.cone.coords(x_hat)
    if np.all(u >= -1e-9):
        if cls.apex == OUTSIDE:
            out["families"]["theorem4"] = _separation_json(cls, build_epsilon_table_GD(cls), x_hat)
        for k in cls.N2:
            try:
                table = build_epsilon_table_Sk(cls, build_sk_geometry(cls, k))
            except CapabilityError as exc:
                out["families"][f"theorem8:S{cls.cone.label(k)}"] = {"skipped": str(exc)}
                continue
            out["families"][f"theorem8:S{cls.cone.label(k)}"] = _separation_json(cls, table, x_hat)
    else:
        out["families_skipped"] = "candidate lies outside the simplicial cone"
    best = None
    for name, terms in disjunctions(inst, cls).items():
        cut = cglp_separate(terms, x_hat)
        if cut is None:
            out["cglp"][name] = {"cut": None, "terms": [t.label for t in terms]}
            continue
        rec = {"cut": _cut_json(cut.as_cut()), "violation": _num(cut.violation),
               "certificate_residual": _num(cut.certify(terms)), "terms": list(cut.labels)}
        out["cglp"][name] = rec
        if best is None or cut.violation > best[1]:
            best = (name, cut.violation)
    out["best"] = None if best is None else {"disjunction": best[0], **out["cglp"][best[0]]}
    _emit(out)
    return EXIT_OK


# -- verify ---------------------------------------------------------------------------


def _suite_sampling(inst, cls, n, seed, force) -> dict:
    checks = {}
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        pts = V.sample_reverse_convex(inst.system, inst.body, inst.box, n, seed, inst.tol_strict) if n else np.zeros((0, inst.n))
    if caught or n == 0:
        checks["warning"] = "no samples drawn; checks pass vacuously"
    in_cone = pts[np.all(cls.cone.coords(pts) >= -1e-9, axis=1)] if len(pts) else pts
    if cls.apex == OUTSIDE:
        try:
            disj = two_term_disjunction(cls, check=not force)
            rep = V.two_term_coverage(cls, disj, in_cone, inst.tol_feas)
            entry = rep.summary()
            entry["passed"] = rep.passed
            if rep.violations:
                entry["example"] = _num(rep.violations[0].point)
            checks["two-term"] = entry
        except ValidityError as exc:
            checks["two-term"] = {"skipped": str(exc)}
    cuts = []
    for mode in ("standard", "external"):
        try:
            rec = collect_cuts(inst, cls, mode)
        except (PreconditionError, CliError, ValidityError):
            continue
        for c in rec["cuts"]:
            if c["original"] is not None:
                cuts.append(LinearCut(np.array(c["original"]["coef"], dtype=float), c["original"]["sense"],
                                      float(c["original"]["rhs"]), space="original", note=c["note"]))
    if cuts:
        rep = V.cut_validity(cls, cuts, pts, inst.tol_feas)
        checks["cuts"] = {**rep.summary(), "passed": rep.passed, "count": len(cuts)}
    for name, terms in disjunctions(inst, cls).items():
        rep = V.union_validity(terms, in_cone, inst.tol_feas)
        checks[f"union:{name}"] = {**rep.summary(), "passed": rep.passed}
        if inst.candidate is not None:
            cut = cglp_separate(terms, inst.candidate)
            if cut is not None:
                slack = V.certify_cut(terms, cut.as_cut())
                checks[f"cglp:{name}"] = {"slack": _num(slack), "passed": slack >= -1e-6}
    return checks


def _tables(cls) -> list:
    out = []
    if cls.apex == OUTSIDE:
        out.append(("S0", build_epsilon_table_GD(cls)))
    for k in cls.N2:
        try:
            out.append((f"S{cls.cone.label(k)}", build_epsilon_table_Sk(cls, build_sk_geometry(cls, k))))
        except CapabilityError:
            continue
    return out


def _suite_ef(inst, cls, n, seed) -> dict:
    checks = {}
    rng = np.random.default_rng(seed)
    for label, table in _tables(cls):
        if len(table.M) > 8:
            checks[label] = {"skipped": f"|M| = {len(table.M)}"}
            continue
        ef = build_extended_formulation(table)
        probes = rng.uniform(0.0, 3.0, size=(max(n // 10, 1) if n else 0, cls.size))
        rep = V.ef_projection_check(ef, table, probes)
        checks[label] = {"probes": rep.probes, "agree": rep.agree, "ambiguous": rep.ambiguous,
                         "false_in": rep.false_in, "false_out": rep.false_out, "passed": rep.passed}
    return checks


def _suite_separation(inst, cls, n, seed) -> dict:
    checks = {}
    rng = np.random.default_rng(seed)
    for label, table in _tables(cls):
        if len(table.M) > V.BRUTE_LIMIT:
            checks[label] = {"skipped": f"|M| = {len(table.M)}"}
            continue
        worst, gap = 0.0, 0.0
        for x in rng.uniform(0.0, 3.0, size=(min(n, 200), cls.size)):
            res = separate(table, x)
            _, best = V.brute_force_separation(table, x)
            worst = max(worst, abs(res.objective - best))
            gap = max(gap, res.integrality_gap)
        checks[label] = {"max_gap_to_brute_force": _num(worst), "max_fractionality": _num(gap),
                         "passed": worst <= 1e-6 and gap <= 1e-6}
    return checks


def _suite_supermodular(inst, cls, n, seed) -> dict:
    checks = {}
    rng = np.random.default_rng(seed)
    for label, table in _tables(cls):
        M = table.M
        if len(M) > ENUM_LIMIT:
            checks[label] = {"skipped": f"|M| = {len(M)}"}
            continue
        worst = -math.inf
        for x in rng.uniform(0.0, 3.0, size=(5, cls.size)):
            ok, w = V.check_supermodular(lambda S: table.value(sorted(S), x), M)
            worst = max(worst, w)
        if worst == -math.inf:
            worst = 0.0
        checks[label] = {"worst_marginal_violation": _num(worst), "passed": worst <= 1e-9}
    return checks


def cmd_verify(args) -> int:
    inst = _instance(args)
    cls = inst.classify()
    n = inst.options.get("samples", 10_000) if args.samples is None else args.samples
    seed = inst.seed
    suites = SUITES[1:] if args.suite == "all" else (args.suite,)
    report = {"instance": inst.source, "seed": seed, "samples": n, "suites": {}}
    runners = {
        "sampling": lambda: _suite_sampling(inst, cls, n, seed, args.no_assumption_check),
        "ef": lambda: _suite_ef(inst, cls, n, seed),
        "separation": lambda: _suite_separation(inst, cls, n, seed),
        "supermodular": lambda: _suite_supermodular(inst, cls, n, seed),
    }
    passed = True
    for s in suites:
        try:
            checks = runners[s]()
        except (CapabilityError, PreconditionError) as exc:
            checks = {"skipped": str(exc)}
        for v in checks.values():
            if isinstance(v, dict) and v.get("passed") is False:
                passed = False
        report["suites"][s] = checks
    report["passed"] = passed
    _emit(report)
    return EXIT_OK if passed else EXIT_FAIL


# -- plotdata -----------------------------------------------------------------------------


def cmd_plotdata(args) -> int:
    from .plotting import level_contours, plot_rows, render_png, rows_to_csv, original_cut

    inst = _instance(args)
    if inst.n != 2:
        raise CliError(EXIT_DIM, "dimension", f"plot data needs n = 2, got {inst.n}")
    cls = inst.classify()
    box = inst.box
    cuts = []
    for mode in ("standard", "two-term", "external", "multiterm"):
        try:
            rec = collect_cuts(inst, cls, mode)
        except (PreconditionError, ValidityError, CapabilityError, CliError, EmptyRegionError):
            continue
        for c in rec["cuts"]:
            if c["original"] is None:
                continue
            label = f"{mode}:{c['note']}".replace(", ", " ").replace(",", ";")
            cuts.append((label, np.array(c["original"]["coef"], dtype=float), float(c["original"]["rhs"])))
    n = args.samples if args.samples is not None else 500
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        samples = V.sample_reverse_convex(inst.system, inst.body, box, n, inst.seed, inst.tol_strict) if n else np.zeros((0, 2))
    extra = []
    if cls.apex == OUTSIDE and (cls.N1 or cls.N2):
        fill = lambda y: 0.0 if V.membership_TC(cls, y) else 1.0
        extra.append(("TC_boundary", level_contours(fill, box, 0.5, grid=args.grid)))
    rows = plot_rows(inst.system, inst.body, box, cuts, samples, extra)
    text = rows_to_csv(rows)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        stem = Path(inst.source).stem if inst.source else "instance"
        (out / f"{stem}.csv").write_text(text)
        render_png(rows, box, out / f"{stem}.png", title=stem)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# -- entry point -------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="revconvex", description="Cuts and disjunctions for reverse convex sets.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("instance", help="instance JSON file")
        sp.add_argument("--basis", help="comma-separated one-based basic columns")
        sp.add_argument("--tol-feas", type=float, default=None)
        sp.add_argument("--tol-strict", type=float, default=None)
        sp.add_argument("--seed", type=int, default=None)
        return sp

    common(sub.add_parser("analyze", help="basis, rays, lambda table, assumption checks"))
    sp = common(sub.add_parser("cuts", help="cuts of one family"))
    sp.add_argument("--mode", choices=MODES, default="two-term")
    common(sub.add_parser("separate", help="separate the instance candidate"))
    sp = common(sub.add_parser("verify", help="sampling and exhaustive checks"))
    sp.add_argument("--suite", choices=SUITES, default="all")
    sp.add_argument("--samples", type=int, default=None)
    sp.add_argument("--no-assumption-check", action="store_true",
                    help="build the two-term disjunction even when a ray misses C")
    sp = common(sub.add_parser("plotdata", help="CSV (and PNG with --out) for 2-D instances"))
    sp.add_argument("--samples", type=int, default=None)
    sp.add_argument("--out", help="directory for CSV and PNG files; CSV goes to stdout otherwise")
    sp.add_argument("--grid", type=int, default=41, help="grid size for the inner-approximation boundary")
    return p


COMMANDS = {
    "analyze": cmd_analyze,
    "cuts": cmd_cuts,
    "separate": cmd_separate,
    "verify": cmd_verify,
    "plotdata": cmd_plotdata,
}


def _error(code: int, kind: str, message: str, **extra) -> int:
    _emit({"error": {"type": kind, "message": message, **extra}}, sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except CliError as exc:
        return _error(exc.code, exc.kind, str(exc), **exc.extra)
    except SchemaError as exc:
        return _error(EXIT_SCHEMA, "schema", str(exc))
    except ValidityError as exc:
        w = exc.witness
        return _error(EXIT_ASSUMPTION, "assumption", str(exc), witness_ray=None if w is None else int(w) + 1)
    except EmptyRegionError as exc:
        return _error(EXIT_ASSUMPTION, "empty", str(exc))
    except (PreconditionError, CapabilityError) as exc:
        return _error(EXIT_ASSUMPTION, "precondition", str(exc))
    except (StructuralError, BasisError) as exc:
        return _error(EXIT_SCHEMA, "structure", str(exc))
    except (LpError, OracleError, LiftingError, np.linalg.LinAlgError) as exc:
        return _error(EXIT_NUMERIC, "numeric", str(exc))


if __name__ == "__main__":
    sys.exit(main())

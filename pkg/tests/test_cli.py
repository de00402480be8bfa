import json
import subprocess
import sys

import pytest

from revconvex.cli import main
from revconvex.instance import fixture_path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def fx(i):
    return fixture_path(f"example{i}.json")


def test_analyze_example1_partition(capsys):
    code, out, _ = run(capsys, "analyze", fx(1))
    rep = json.loads(out)
    assert code == 0
    assert rep["partition"] == {"N0": [], "N1": [2], "N2": [1]}
    assert rep["lambda_table"][1]["lambda2"] == "inf"


def test_analyze_example5_assumption1(capsys):
    code, out, _ = run(capsys, "analyze", fx(5))
    rep = json.loads(out)
    assert rep["assumption1"]["holds"] is False and rep["assumption1"]["witness"] == 2


def test_malformed_json_exit_2(capsys, tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    code, _, err = run(capsys, "analyze", p)
    assert code == 2 and json.loads(err)["error"]["type"] == "schema"


def test_schema_violation_exit_2(capsys, tmp_path):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"polyhedron": {"ineq": {"C": [[1, 2]], "d": [1]}}, "body": {"kind": "ball", "center": [0, 0, 0], "radius": 1}}))
    code, _, _ = run(capsys, "analyze", p)
    assert code == 2


def test_candidate_dimension_mismatch_exit_2(capsys, tmp_path):
    doc = json.loads(fx(1).read_text())
    doc["candidate"] = [0.1, 0.2, 0.3]
    p = tmp_path / "c.json"
    p.write_text(json.dumps(doc))
    code, _, _ = run(capsys, "separate", p)
    assert code == 2


def test_external_cut_example2(capsys):
    code, out, _ = run(capsys, "cuts", fx(2), "--mode", "external")
    rep = json.loads(out)
    assert code == 0 and len(rep["cuts"]) == 1
    cut = rep["cuts"][0]["original"]
    assert cut["sense"] == ">="
    assert cut["coef"][0] * 1.0 == pytest.approx(cut["rhs"], abs=1e-6)
    assert rep["cuts"][0]["provenance"]["basis"] == [1]


def test_two_term_example1(capsys):
    code, out, _ = run(capsys, "cuts", fx(1), "--mode", "two-term")
    cuts = json.loads(out)["cuts"]
    assert [c["provenance"]["side"] for c in cuts] == ["left", "right"]
    assert cuts[0]["nonbasic"]["coef"] == pytest.approx([3.414213562, 2.0])


def test_multiterm_example5(capsys):
    code, out, _ = run(capsys, "cuts", fx(5), "--mode", "multiterm")
    terms = {t["label"]: t for t in json.loads(out)["terms"]}
    s0 = [c["original"] for c in terms["S0"]["cuts"]]
    assert len(s0) == 1 and s0[0]["coef"][0] == pytest.approx(-s0[0]["coef"][1])
    assert s0[0]["rhs"] / s0[0]["coef"][0] == pytest.approx(0.3169873, abs=1e-6)
    fam = [c for c in terms["S1"]["cuts"] if c["family"] == "S_k"]
    assert fam[0]["original"]["coef"] == pytest.approx([-0.5, 1.0]) and fam[0]["original"]["rhs"] == 0.0
    assert fam[0]["provenance"]["S"] == [2]


def test_assumption_failure_exit_4(capsys):
    code, _, err = run(capsys, "cuts", fx(4), "--mode", "two-term")
    e = json.loads(err)["error"]
    assert code == 4 and e["type"] == "assumption" and e["witness_ray"] == 2


def test_standard_mode_needs_inside_basis(capsys):
    code, _, _ = run(capsys, "cuts", fx(2), "--mode", "standard")
    assert code == 4
    code, out, _ = run(capsys, "cuts", fx(2), "--mode", "standard", "--basis", "3")
    cut = json.loads(out)["cuts"][0]["original"]
    assert cut["coef"] == pytest.approx([1.0, 1.0]) and cut["rhs"] == pytest.approx(1.0)


def test_separate_example2(capsys):
    code, out, _ = run(capsys, "separate", fx(2))
    rep = json.loads(out)
    assert rep["best"]["violation"] == pytest.approx(0.245421, abs=1e-5)
    fam = rep["families"]["theorem4"]
    assert fam["objective"] == pytest.approx(fam["brute_force"]["objective"])


def test_separate_point_of_reverse_convex_set(capsys, tmp_path):
    doc = json.loads(fx(1).read_text())
    doc["candidate"] = [3.0, 0.0]
    p = tmp_path / "c.json"
    p.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "separate", p)
    assert code == 0 and json.loads(out)["best"] is None


def test_verify_example1_passes(capsys):
    code, out, _ = run(capsys, "verify", fx(1), "--samples", "500")
    assert code == 0 and json.loads(out)["passed"]


def test_verify_example4_forced_fails(capsys):
    code, out, _ = run(capsys, "verify", fx(4), "--suite", "sampling", "--samples", "500", "--no-assumption-check")
    rep = json.loads(out)
    assert code == 1 and rep["suites"]["sampling"]["two-term"]["violations"] > 0
    assert "example" in rep["suites"]["sampling"]["two-term"]


def test_verify_zero_samples_vacuous(capsys):
    code, out, _ = run(capsys, "verify", fx(1), "--suite", "sampling", "--samples", "0")
    rep = json.loads(out)
    assert code == 0 and "warning" in rep["suites"]["sampling"]


def test_plotdata_csv_and_png(capsys, tmp_path):
    code, out, _ = run(capsys, "plotdata", fx(1), "--samples", "50")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "layer,id,seq,x,y"
    layers = {l.split(",")[0] for l in lines[1:]}
    assert {"C_boundary", "P_boundary", "sample"} <= layers
    assert any(l.startswith("cut:two-term") for l in layers)
    code, _, _ = run(capsys, "plotdata", fx(6), "--samples", "50", "--grid", "21", "--out", tmp_path)
    assert (tmp_path / "example6.csv").exists() and (tmp_path / "example6.png").stat().st_size > 0
    assert "TC_boundary" in (tmp_path / "example6.csv").read_text()


def test_plotdata_deterministic(capsys):
    _, a, _ = run(capsys, "plotdata", fx(2), "--samples", "30")
    _, b, _ = run(capsys, "plotdata", fx(2), "--samples", "30")
    assert a == b


def test_plotdata_three_dimensions_exit_5(capsys, tmp_path):
    p = tmp_path / "d3.json"
    p.write_text(json.dumps({"polyhedron": {"ineq": {"C": [], "d": [], "nonneg": [True] * 3}},
                             "body": {"kind": "ball", "center": [2, 0, 0], "radius": 1}}))
    code, _, _ = run(capsys, "plotdata", p)
    assert code == 5


def test_console_script_entry_point():
    out = subprocess.run([sys.executable, "-m", "revconvex.cli", "analyze", str(fx(3))],
                         capture_output=True, text=True, check=True)
    assert json.loads(out.stdout)["partition"]["N1"] == [1, 2]

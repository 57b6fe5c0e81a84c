import json
import subprocess
import sys

import pytest

from contracalc import chartspec, scalar
from contracalc.cli import main
from contracalc.tensor import parse_tensor, tensors_agree

from conftest import FIXTURES


def chart(name):
    return str(FIXTURES / f"{name}.chart.json")


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_validate_pass(capsys):
    code, out, _ = run(capsys, "validate", "--chart", chart("r2-phi"))
    assert code == 0
    assert "PASS  poisson-connection" in out and out.strip().endswith("validate: pass")


def test_validate_json(capsys):
    code, out, _ = run(capsys, "validate", "--chart", chart("r3-fgh"), "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["status"] == "pass"
    assert [c["check"] for c in doc["checks"]] == ["jacobi", "volume-nonzero"]


def test_validate_names_christoffel_failure(capsys, tmp_path):
    doc = json.loads((FIXTURES / "r2-phi.chart.json").read_text())
    doc["connection"][1]["expr"] = "3*x"
    p = tmp_path / "bad.chart.json"
    p.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "validate", "--chart", str(p))
    assert code == 1
    assert "FAIL  poisson-connection" in out or "FAIL  torsion-free" in out


def test_exit_codes(capsys, tmp_path):
    assert run(capsys, "validate", "--chart", str(tmp_path / "missing.json"))[0] == 3
    p = tmp_path / "broken.chart.json"
    p.write_text("{")
    assert run(capsys, "validate", "--chart", str(p))[0] == 2
    # a non-Poisson bivector refuses to load for compute
    p.write_text(json.dumps({"dim": 3, "coords": ["x", "y", "z"], "poisson": [[1, 2, "x"], [2, 3, "y"], [1, 3, "-(z)"]]}))
    assert run(capsys, "compute", "curl", "--chart", str(p), "--input", "e[1]")[0] == 1
    assert run(capsys, "compute", "star", "--chart", chart("r3-fgh"), "--input", "dx[1]")[0] == 2
    assert run(capsys, "compute", "curl", "--chart", chart("r2-phi"), "--input", "e[1")[0] == 2
    assert run(capsys, "compute", "curl", "--chart", chart("r2-phi"))[0] == 2
    assert run(capsys, "verify", "--chart", chart("r2-phi"))[0] == 2
    assert run(capsys, "verify", "nope", "--chart", chart("r2-phi"))[0] == 2
    assert run(capsys, "verify", "star", "--chart", chart("r2-phi"), "--trials", "0")[0] == 2


def test_compute_curl_phi_volume(capsys):
    code, out, _ = run(
        capsys, "compute", "curl", "--chart", chart("r2-standard"),
        "--input", "(x*y)*e[1] + (y^2)*e[2]", "--volume", "1 + x^2",
    )
    assert code == 0
    ch = chartspec.load(chart("r2-standard")).chart
    f, g, phi = (scalar.parse_expr(t, ch) for t in ("x*y", "y^2", "1 + x^2"))
    # div X + (1/phi) X phi
    want = scalar.partial(f, 0) + scalar.partial(g, 1) + f * scalar.partial(phi, 0) / phi
    assert scalar.equal_probabilistic(scalar.parse_expr(out.strip(), ch), want)


def test_compute_modular_vector_r3(capsys):
    code, out, _ = run(capsys, "compute", "modular-vector", "--chart", chart("r3-fgh"), "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["kind"] == "multivector" and doc["grade"] == 1
    b = chartspec.load(chart("r3-fgh"))
    got = parse_tensor(doc["result"], b.chart, kind="multivector", grade=1)
    from contracalc.volume import curl

    assert tensors_agree(got, -curl(b.volume, b.pi.W))


def test_compute_star(capsys):
    code, out, _ = run(capsys, "compute", "star", "--chart", chart("r2-standard"), "--input", "dx[1]")
    assert code == 0 and out.strip() == "dx[1]"


def test_compute_grade_for_zero(capsys):
    code, out, _ = run(capsys, "compute", "coboundary", "--chart", chart("r2-phi"), "--input", "0", "--grade", "1")
    assert code == 0 and out.strip() == "0"


def test_verify_json_is_deterministic(capsys):
    argv = ["verify", "schouten", "--chart", chart("r2-phi"), "--trials", "1", "--seed", "7", "--format", "json", "--cases", "5"]
    a = run(capsys, *argv)
    b = run(capsys, *argv)
    assert a[0] == b[0] == 0
    assert a[1] == b[1]
    doc = json.loads(a[1])
    assert doc["seed"] == 7 and doc["trials"] == 1 and doc["status"] == "pass"


def test_verify_suite_option(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "canonical", "--chart", chart("r3-fgh"), "--cases", "3")
    assert code == 0 and "PASS  canonical/delta-squared  3/3" in out


def test_trials_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("CONTRACALC_TRIALS", "2")
    code, out, _ = run(capsys, "verify", "canonical", "--chart", chart("r2-standard"), "--cases", "2", "--format", "json")
    assert code == 0 and json.loads(out)["trials"] == 2
    monkeypatch.setenv("CONTRACALC_TRIALS", "many")
    assert run(capsys, "verify", "canonical", "--chart", chart("r2-standard"))[0] == 2


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "contracalc.cli", "validate", "--chart", chart("r4-darboux")],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert "validate: pass" in proc.stdout

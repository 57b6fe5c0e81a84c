import json

import pytest
from hypothesis import given

from contracalc import chartspec as cs
from contracalc import scalar
from contracalc.tensor import parse_tensor, tensors_agree

from conftest import FIXTURES, rng_of, seeds

NAMES = ["r2-standard", "r2-phi", "r3-fgh", "r4-darboux", "r4-darboux-s"]


def doc2(expr="x^2+1", **extra):
    return {"dim": 2, "coords": ["x", "y"], "poisson": [{"i": 1, "j": 2, "expr": expr}], **extra}


def r3doc(f, g, h):
    # paper basis e_zx maps to entry (1, 3) with the opposite sign
    return {
        "dim": 3,
        "coords": ["x", "y", "z"],
        "poisson": [[1, 2, f], [2, 3, g], [1, 3, f"-({h})"]],
    }


def test_loads_2d():
    b = cs.from_dict(doc2())
    assert tensors_agree(b.pi.W, parse_tensor("(x^2+1)*e[1,2]", b.chart))
    assert b.volume.coefficient is scalar.ONE
    assert b.connection is None and b.symplectic is None


def test_loads_r3_examples():
    cs.from_dict(r3doc("z", "x", "y"))
    cs.from_dict(r3doc("y", "0", "0"))


def test_jacobi_failure_named():
    with pytest.raises(cs.ChartSpecError) as info:
        cs.from_dict(r3doc("z", "y", "x + z"))
    assert info.value.check == "jacobi"
    # loading without checks still works and the report names the failure
    b = cs.from_dict(r3doc("z", "y", "x + z"), check=False)
    assert dict(cs.run_checks(b))["jacobi"] is False


@pytest.mark.parametrize(
    "doc, check",
    [
        ([], "schema"),
        ({"dim": 0}, "schema"),
        ({"dim": 2, "coords": ["x"]}, "schema"),
        ({"dim": 2, "coords": ["x", "x"]}, "schema"),
        (doc2("x +"), "parse"),
        (doc2("w"), "parse"),
        ({"dim": 2, "coords": ["x", "y"], "poisson": [[2, 1, "x"]]}, "index-order"),
        ({"dim": 2, "coords": ["x", "y"], "poisson": [[1, 3, "x"]]}, "index-range"),
        ({"dim": 2, "coords": ["x", "y"], "poisson": [[1, 2, "x"], [1, 2, "y"]]}, "schema"),
        ({"dim": 2, "coords": ["x", "y"], "poisson": [{"i": 1, "expr": "x"}]}, "schema"),
        (doc2(volume={"expr": "x - x"}), "volume-nonzero"),
        (doc2(connection=[[1, 1, 5, "x"]]), "index-range"),
        (doc2(symplectic={"kind": "?"}), "schema"),
        (doc2("x - x", symplectic={"source": "invert-poisson"}), "nondegenerate"),
    ],
)
def test_rejections(doc, check):
    with pytest.raises(cs.ChartSpecError) as info:
        cs.from_dict(doc)
    assert info.value.check == check


def test_json_error():
    with pytest.raises(cs.ChartSpecError) as info:
        cs.loads("{not json")
    assert info.value.check == "json"


def test_missing_file():
    with pytest.raises(OSError):
        cs.load(FIXTURES / "nope.chart.json")


def test_omega_block():
    doc = {"dim": 2, "coords": ["x", "y"], "symplectic": {"omega": [[1, 2, "1/(1+x^2)"]]}}
    b = cs.from_dict(doc)
    assert tensors_agree(b.pi.W, parse_tensor("(1+x^2)*e[1,2]", b.chart))
    bad = dict(doc, poisson=[[1, 2, "x^2 + 2"]])
    with pytest.raises(cs.ChartSpecError) as info:
        cs.from_dict(bad)
    assert info.value.check == "symplectic-consistency"


def test_non_closed_omega():
    doc = {
        "dim": 4,
        "coords": ["a", "b", "c", "d"],
        "symplectic": {"omega": [[1, 3, "a"], [2, 4, "a"]]},
    }
    with pytest.raises(cs.ChartSpecError) as info:
        cs.from_dict(doc)
    assert info.value.check == "closed"


@pytest.mark.parametrize("name", NAMES)
def test_fixture_round_trip(name):
    path = FIXTURES / f"{name}.chart.json"
    b = cs.load(path)
    text = cs.dumps(b)
    assert json.loads(text) == json.loads(path.read_text())
    again = cs.loads(text)
    assert cs.dumps(again) == text
    assert all(ok for _, ok in cs.run_checks(b))


def test_run_checks_order():
    b = cs.load(FIXTURES / "r2-phi.chart.json")
    names = [n for n, _ in cs.run_checks(b)]
    assert names == [
        "jacobi", "volume-nonzero", "nondegenerate", "closed",
        "liouville-normalization", "poisson-connection", "torsion-free",
    ]


def test_mutated_connection_fails_checks():
    doc = json.loads((FIXTURES / "r2-phi.chart.json").read_text())
    doc["connection"][0]["expr"] = "x"
    b = cs.from_dict(doc)
    failed = [n for n, ok in cs.run_checks(b) if not ok]
    assert failed and set(failed) <= {"poisson-connection", "torsion-free"}


@given(seeds)
def test_random_r3_round_trip(seed):
    from contracalc import randgen as rg

    rng = rng_of(seed)
    chart = scalar.Chart(("x", "y", "z"))
    W = rg.poisson_r3(rng, chart)
    doc = {
        "dim": 3,
        "coords": ["x", "y", "z"],
        "poisson": [{"i": I[0] + 1, "j": I[1] + 1, "expr": scalar.to_text(c, chart)} for I, c in sorted(W.coeffs.items())],
        "volume": {"expr": scalar.to_text(rg.positive(rng, chart), chart)},
    }
    b = cs.from_dict(doc)
    assert cs.to_dict(b) == doc

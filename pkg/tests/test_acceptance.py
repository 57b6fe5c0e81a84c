"""Acceptance criteria 1-10.

Every criterion records one PASS/FAIL line; the lines are printed in the
terminal summary (see conftest.py) or directly when run as a script.
"""

import functools
import json
import random
import sys
import time

import pytest

from contracalc import scalar
from contracalc import connection as cn
from contracalc import randgen as rg
from contracalc import symplectic as sy
from contracalc import volume as vo
from contracalc.cli import main
from contracalc.scalar import Chart, partial
from contracalc.suites import SuiteConfig, run_suite
from contracalc.tensor import Form, MultiVector, apply_vector, is_zero, tensors_agree

from conftest import FIXTURES, load_fixture

TRIALS, SEED = 8, 0
ALL = ["r2-standard", "r2-phi", "r3-fgh", "r4-darboux", "r4-darboux-s"]
SYMPLECTIC = ["r2-standard", "r2-phi", "r4-darboux", "r4-darboux-s"]
SUITE_BUDGET = 60.0  # seconds per suite run

REPORT: dict[int, str] = {}


def criterion(number, title):
    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kw):
            try:
                detail = fn(*args, **kw)
            except BaseException as exc:
                REPORT[number] = f"criterion {number:2d} FAIL  {title}: {type(exc).__name__}: {str(exc)[:120]}"
                raise
            REPORT[number] = f"criterion {number:2d} PASS  {title}" + (f" ({detail})" if detail else "")

        return run

    return wrap


def suite_ok(name, suite, only=None, min_cases=None):
    """Run one suite on one fixture; every non-skipped identity must pass."""
    cfg = SuiteConfig(trials=TRIALS, seed=SEED)
    t0 = time.perf_counter()
    results = run_suite(load_fixture(name), suite, cfg)
    elapsed = time.perf_counter() - t0
    assert elapsed < SUITE_BUDGET, f"{suite} on {name} took {elapsed:.1f}s"
    ran = 0
    for r in results:
        if only is not None and r.name not in only:
            continue
        assert r.skipped is None, f"{suite}/{r.name} skipped on {name}: {r.skipped}"
        assert r.ok, f"{suite}/{r.name} failed on {name}: {r.passed}/{r.cases} {json.dumps(r.failure)[:300]}"
        if min_cases is not None and r.cases > 1:
            assert r.cases >= min_cases, f"{suite}/{r.name} ran only {r.cases} cases"
        ran += r.cases
    return ran


def eq(a, b):
    return scalar.equal_probabilistic(a, b, TRIALS, SEED)


def agree(A, B):
    return tensors_agree(A, B, TRIALS, SEED)


# ---------------------------------------------------------------- 1


R2 = Chart(("x", "y"))
R3 = Chart(("x", "y", "z"))
SMALL = rg.GenConfig(max_degree=2, max_terms=2)


def vec(chart, *comps):
    return MultiVector(chart, 1, {(i,): c for i, c in enumerate(comps)})


def _worked_examples(rng):
    d = partial
    # standard volume: the curl is the divergence
    for m in range(1, 5):
        chart = Chart(tuple(f"x{i}" for i in range(1, m + 1)))
        X = rg.multivector(rng, chart, 1)
        div = scalar.total(d(X.coeff((i,)), i) for i in range(m))
        assert eq(vo.curl(vo.VolumeForm.standard(chart), X).as_scalar(), div)

    # mu = omega = phi dx^dy
    phi = rg.nonvanishing_rational(rng, R2, SMALL)
    f, g = rg.polynomial(rng, R2), rg.polynomial(rng, R2)
    X = vec(R2, f, g)
    got = vo.curl(vo.VolumeForm.from_coefficient(R2, phi), X).as_scalar()
    assert eq(got, d(f, 0) + d(g, 1) + apply_vector(X, phi) / phi)

    # three-dimensional curl of Pi
    W = rg.poisson_r3(rng, R3)
    F, G, H = W.coeff((0, 1)), W.coeff((1, 2)), W.coeff_unsorted((2, 0))
    want = vec(R3, d(F, 1) - d(H, 2), d(G, 2) - d(F, 0), d(H, 0) - d(G, 1))
    std3 = vo.VolumeForm.standard(R3)
    assert agree(vo.curl(std3, W), want)
    # Lambda^2 Pi = 0
    assert is_zero(vo.modular_operator(W, std3, W), TRIALS, SEED)

    # two-dimensional modular operator, phi e_x ^ e_y with mu = dx^dy
    phi = rg.polynomial(rng, R2, nonzero=True)
    Pi = MultiVector(R2, 2, {(0, 1): phi})
    std2 = vo.VolumeForm.standard(R2)
    px, py = d(phi, 0), d(phi, 1)
    Fn = rg.polynomial(rng, R2)
    lam0 = vo.modular_operator(Pi, std2, MultiVector.scalar(R2, Fn)).as_scalar()
    assert eq(lam0, px * d(Fn, 1) - py * d(Fn, 0))
    assert eq(lam0, apply_vector(vo.modular_vector_field(Pi, std2), Fn))
    f, g = rg.polynomial(rng, R2), rg.polynomial(rng, R2)
    X = vec(R2, f, g)
    first = vec(
        R2,
        py * d(f, 0) - d(f, 1) * px - f * d(py, 0) - g * d(py, 1),
        -px * d(g, 1) + d(g, 0) * py + f * d(px, 0) + g * d(px, 1),
    )
    Xi = vec(R2, -py, px)  # F -> phi_x F_y - phi_y F_x
    second = vec(R2, -(apply_vector(Xi, f) + apply_vector(X, py)), -apply_vector(Xi, g) + apply_vector(X, px))
    lam1 = vo.modular_operator(Pi, std2, X)
    assert agree(lam1, first)
    assert agree(lam1, second)

    # closing example: omega = (1/phi) dx^dy, nu = dx^dy = phi * liouville
    phi = rg.nonvanishing_rational(rng, R2, SMALL)
    S = sy.SymplecticStructure.from_omega(Form(R2, 2, {(0, 1): 1 / phi}))
    D = cn.build_2d_canonical(S.pi)
    px, py = d(phi, 0), d(phi, 1)
    want = vec(
        R2,
        d(f, 0) * py - d(f, 1) * px - f * d(px, 1) - g * d(py, 1),
        d(g, 0) * py - d(g, 1) * px + f * d(px, 0) + g * d(px, 1),
    )
    assert agree(sy.modular_changed_volume(S, D, phi, X, trials=TRIALS, seed=SEED), want)
    assert agree(vo.modular_operator(S.pi, std2, X), want)


@criterion(1, "worked examples reproduce exactly")
def test_criterion_01_examples():
    n = 10
    for k in range(n):
        _worked_examples(random.Random(f"acceptance-1:{k}"))
    return f"{n} random instantiations"


# ---------------------------------------------------------------- 2


@criterion(2, "chain-complex laws on every fixture")
def test_criterion_02_chain_complexes():
    total = 0
    for name in ALL:
        total += suite_ok(name, "exterior", only={"d-squared"}, min_cases=50)
        total += suite_ok(name, "canonical", only={"coboundary-squared", "delta-squared"}, min_cases=50)
        total += suite_ok(name, "curl-modular", only={"curl-squared"}, min_cases=50)
    return f"{total} cases"


# ---------------------------------------------------------------- 3


@criterion(3, "Schouten suite")
def test_criterion_03_schouten():
    only = {"S1-antisymmetry", "S2-jacobi", "S3-leibniz", "S4-leibniz",
            "interior-characterization", "hamiltonian", "two-routes"}
    total = sum(suite_ok(name, "schouten", only=only, min_cases=50) for name in ALL)
    return f"{total} cases"


# ---------------------------------------------------------------- 4


@criterion(4, "modular suite")
def test_criterion_04_modular():
    only = {"modular-field-routes", "lambda0-is-xi", "lambda-bracket"}
    total = sum(suite_ok(name, "curl-modular", only=only) for name in ALL)
    return f"{total} cases"


# ---------------------------------------------------------------- 5


@criterion(5, "local coboundary through a connection")
def test_criterion_05_local_coboundary():
    total = sum(suite_ok(name, "thm4") for name in SYMPLECTIC)
    return f"{total} cases"


# ---------------------------------------------------------------- 6


@criterion(6, "star suite")
def test_criterion_06_star():
    total = sum(suite_ok(name, "star") for name in SYMPLECTIC)
    return f"{total} cases"


# ---------------------------------------------------------------- 7


@criterion(7, "induced connection and local curl")
def test_criterion_07_induced_connection():
    total = 0
    for name in SYMPLECTIC:
        darboux = name != "r2-phi"
        only = None if darboux else {
            "parallel-omega", "pi-k-compatible", "nabla-volume-star", "nabla-torsion-free",
            "nabla-leibniz", "flat-commutes", "curl-local", "delta-local",
        }
        total += suite_ok(name, "thm5-curl", only=only)
    # the omega = phi dx^dy chart of the worked example
    rng = random.Random("acceptance-7")
    for _ in range(10):
        phi = rg.nonvanishing_rational(rng, R2, SMALL)
        S = sy.SymplecticStructure.from_omega(Form(R2, 2, {(0, 1): phi}))
        D = cn.build_2d_canonical(S.pi)
        X = rg.multivector(rng, R2, 1)
        f, g = X.coeff((0,)), X.coeff((1,))
        want = partial(f, 0) + partial(g, 1) - phi * apply_vector(X, 1 / phi)
        assert eq(sy.curl_local(S, D, X, trials=TRIALS, seed=SEED).as_scalar(), want)
    return f"{total} suite cases"


# ---------------------------------------------------------------- 8


def _has_curvature(name):
    b = load_fixture(name)
    chart, D = b.chart, b.connection
    dx = [Form.basis(chart, i) for i in range(chart.dim)]
    for i in range(chart.dim):
        for j in range(i + 1, chart.dim):
            for k in range(chart.dim):
                if not is_zero(cn.curvature(D, dx[i], dx[j], MultiVector.basis(chart, k)), TRIALS, SEED):
                    return True
    return False


@criterion(8, "curvature identity")
def test_criterion_08_curvature_identity():
    total = 0
    for name in ("r2-phi", "r4-darboux-s"):
        assert _has_curvature(name), f"{name} has flat curvature"
        total += suite_ok(name, "thm5-main", min_cases=25)
    # Gamma = 0: both sides vanish, asserted inside the suite
    for name in ("r2-standard", "r4-darboux"):
        assert load_fixture(name).connection.is_flat_coefficients()
        total += suite_ok(name, "thm5-main", min_cases=25)
    return f"{total} cases"


# ---------------------------------------------------------------- 9


@criterion(9, "changed-volume routes agree")
def test_criterion_09_changed_volume():
    total = sum(suite_ok(name, "thm5-volume", min_cases=10) for name in SYMPLECTIC)
    return f"{total} cases"


# ---------------------------------------------------------------- 10


def _cli(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


@criterion(10, "CLI contract")
def test_criterion_10_cli(capsys, tmp_path):
    for name in ALL:
        code, out = _cli(capsys, "verify", "all", "--chart", str(FIXTURES / f"{name}.chart.json"))
        assert code == 0, f"verify all failed on {name}:\n{out[-2000:]}"

    doc = json.loads((FIXTURES / "r2-phi.chart.json").read_text())
    doc["connection"][0]["expr"] = "-(3*x)"
    bad = tmp_path / "r2-phi-mutated.chart.json"
    bad.write_text(json.dumps(doc))
    code, out = _cli(capsys, "validate", "--chart", str(bad))
    assert code == 1
    failed = [line.split()[1] for line in out.splitlines() if line.startswith("FAIL")]
    assert failed and set(failed) <= {"poisson-connection", "torsion-free"}

    argv = ["verify", "thm5-main", "--chart", str(FIXTURES / "r4-darboux-s.chart.json"),
            "--seed", "11", "--format", "json", "--cases", "5"]
    a = _cli(capsys, *argv)
    b = _cli(capsys, *argv)
    assert a[0] == b[0] == 0 and a[1].encode() == b[1].encode()
    return f"mutation named {', '.join(failed)}"


if __name__ == "__main__":
    code = pytest.main([__file__, "-q", "-p", "no:cacheprovider"])
    sys.exit(code)

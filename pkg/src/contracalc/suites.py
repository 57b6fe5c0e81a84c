"""Randomized identity suites over a chart bundle.

Each identity draws its inputs from ``random.Random(f"{seed}:{suite}:{name}")``
so a (chart, suite, seed, trials, cases) tuple always produces the same report.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable

from . import randgen as rg
from . import scalar
from .scalar import ONE, ZERO
from .tensor import (
    Form,
    MultiVector,
    _regrade,
    exterior_derivative,
    interior_by_form,
    interior_by_vector,
    is_zero,
    pairing,
    parse_tensor,
    tensor_text,
    tensors_agree,
    wedge,
)
from .poisson import (
    coboundary,
    delta_brylinski,
    hamiltonian,
    jacobi_check,
    pi_k,
    poisson_bracket,
    schouten,
    schouten_leibniz,
    sharp1,
    sharp_k,
)
from .volume import (
    curl,
    koszul_curl_identity_check,
    curl_bracket_identity_check,
    modular_operator,
    modular_operator_bracket,
    modular_vector_field,
    modular_vector_field_via_lie,
    mu_flat,
    mu_sharp,
)
from .connection import (
    coboundary_in_frame,
    coboundary_via_connection,
    constant_frame,
    curvature,
    d_form,
    d_multivector,
    d_pi,
    is_poisson_connection,
    is_torsion_free,
    koszul_bracket,
    torsion,
)
from .symplectic import (
    curl_darboux,
    curl_local,
    delta_local,
    delta_via_star,
    flat,
    flat_k,
    induced_nabla,
    induced_nabla_vector,
    main_identity_sides,
    modular_changed_volume,
    omega_k,
    star,
    torsion_nabla,
)
from .chartspec import ChartBundle, to_dict

__all__ = ["SUITES", "Identity", "IdentityResult", "SuiteConfig", "run_suite", "suite_names"]


@dataclass(frozen=True)
class SuiteConfig:
    trials: int = scalar.DEFAULT_TRIALS
    seed: int = 0
    max_degree: int = 3
    cases: int | None = None  # overrides every identity's default case count

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.max_degree < 0:
            raise ValueError("max_degree must be >= 0")
        if self.cases is not None and self.cases < 1:
            raise ValueError("cases must be >= 1")


class Ctx:
    """Per-run state handed to identity functions."""

    def __init__(self, bundle: ChartBundle, cfg: SuiteConfig):
        self.bundle = bundle
        self.chart = bundle.chart
        self.n = bundle.chart.dim
        self.pi = bundle.pi
        self.vol = bundle.volume
        self.D = bundle.connection
        self.S = bundle.symplectic
        self.trials = cfg.trials
        self.gen = rg.GenConfig(max_degree=cfg.max_degree)
        # smaller inputs where the operators compose deeply
        self.gen_small = rg.GenConfig(max_degree=min(cfg.max_degree, 2), max_terms=2)
        self._admissible = None

    @property
    def admissible(self) -> bool:
        if self._admissible is None:
            self._admissible = (
                self.D is not None
                and is_poisson_connection(self.D, self.trials)
                and is_torsion_free(self.D, self.trials)
            )
        return self._admissible


@dataclass
class Case:
    """Outcome of one random instance: ``ok`` plus the operands that produced it."""

    ok: bool
    operands: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Identity:
    suite: str
    name: str
    fn: Callable[[Ctx, random.Random, int], Case]
    cases: int = 50
    needs: tuple = ()


@dataclass
class IdentityResult:
    suite: str
    name: str
    cases: int
    passed: int
    skipped: str | None = None
    failure: dict | None = None

    @property
    def ok(self) -> bool:
        return self.skipped is not None or self.passed == self.cases

    def to_dict(self) -> dict:
        d = {"suite": self.suite, "identity": self.name, "cases": self.cases, "passed": self.passed}
        d["status"] = "skip" if self.skipped else ("pass" if self.ok else "fail")
        if self.skipped:
            d["reason"] = self.skipped
        if self.failure is not None:
            d["failure"] = self.failure
        return d


class _Ops(dict):
    """Operand log that prints scalars with the run's chart."""

    def __init__(self, chart):
        super().__init__()
        self.chart = chart

    def add(self, **kw):
        for k, v in kw.items():
            if isinstance(v, scalar.Expr):
                self[k] = scalar.to_text(v, self.chart)
            elif hasattr(v, "coeffs"):
                self[k] = tensor_text(v)
            else:
                self[k] = v
        return self


def _sign(k: int) -> int:
    return -1 if k % 2 else 1


def _agree(ctx, A, B, seed) -> bool:
    return tensors_agree(A, B, ctx.trials, seed)


def _zero(ctx, A, seed) -> bool:
    return is_zero(A, ctx.trials, seed)


def _eq(ctx, a, b, seed) -> bool:
    return scalar.equal_probabilistic(a, b, ctx.trials, seed)


def _mv(ctx, rng, g, small=False):
    return rg.multivector(rng, ctx.chart, g, ctx.gen_small if small else ctx.gen)


def _fm(ctx, rng, g, small=False):
    return rg.form(rng, ctx.chart, g, ctx.gen_small if small else ctx.gen)


def _fn(ctx, rng, small=False):
    return rg.polynomial(rng, ctx.chart, ctx.gen_small if small else ctx.gen, nonzero=True)


# ---------------------------------------------------------------- exterior


def d_squared(ctx, rng, seed):
    ops = _Ops(ctx.chart)
    for g in range(0, ctx.n - 1):
        eta = _fm(ctx, rng, g)
        ops.add(**{f"eta{g}": eta})
        if not _zero(ctx, exterior_derivative(exterior_derivative(eta)), seed):
            return Case(False, ops)
    return Case(True, ops)


def d_leibniz(ctx, rng, seed):
    a = rng.randint(0, ctx.n)
    b = rng.randint(0, ctx.n - a)
    al, be = _fm(ctx, rng, a), _fm(ctx, rng, b)
    lhs = exterior_derivative(wedge(al, be))
    rhs = wedge(exterior_derivative(al), be) + wedge(al, exterior_derivative(be)) * _sign(a)
    return Case(_agree(ctx, lhs, rhs, seed), _Ops(ctx.chart).add(alpha=al, beta=be))


def wedge_graded(ctx, rng, seed):
    a = rng.randint(0, ctx.n)
    b = rng.randint(0, ctx.n - a)
    al, be = _fm(ctx, rng, a), _fm(ctx, rng, b)
    ok = _agree(ctx, wedge(al, be), wedge(be, al) * _sign(a * b), seed)
    return Case(ok, _Ops(ctx.chart).add(alpha=al, beta=be))


def interior_adjoint(ctx, rng, seed):
    p = rng.randint(0, ctx.n)
    a = rng.randint(0, p)
    eta, A, B = _fm(ctx, rng, p), _mv(ctx, rng, a), _mv(ctx, rng, p - a)
    tau = _fm(ctx, rng, p - a)
    C = _mv(ctx, rng, p)
    ok = _eq(ctx, pairing(_regrade(interior_by_vector(A, eta), p - a), B), pairing(eta, wedge(A, B)), seed)
    # <tau, i(eta_a) C> = <tau ^ eta_a, C> with eta_a of grade a
    eta_a = _fm(ctx, rng, a)
    ok = ok and _eq(
        ctx, pairing(tau, _regrade(interior_by_form(eta_a, C), p - a)), pairing(wedge(tau, eta_a), C), seed
    )
    return Case(ok, _Ops(ctx.chart).add(eta=eta, A=A, B=B, tau=tau, eta_a=eta_a, C=C))


def interior_wedge_rule(ctx, rng, seed):
    # i(alpha)(X ^ A) = X ^ i(alpha)A + (-1)^a alpha(X) A
    a = rng.randint(0, ctx.n - 1)
    al, X, A = _fm(ctx, rng, 1), _mv(ctx, rng, 1), _mv(ctx, rng, a)
    lhs = interior_by_form(al, wedge(X, A))
    rhs = A * (pairing(al, X) * _sign(a))
    if a:
        rhs = rhs + wedge(X, interior_by_form(al, A))
    return Case(_agree(ctx, lhs, rhs, seed), _Ops(ctx.chart).add(alpha=al, X=X, A=A))


def text_round_trip(ctx, rng, seed):
    g = rng.randint(0, ctx.n)
    T = _mv(ctx, rng, g) if rng.random() < 0.5 else _fm(ctx, rng, g)
    kind = "multivector" if isinstance(T, MultiVector) else "form"
    back = parse_tensor(tensor_text(T), ctx.chart, kind=kind, grade=g)
    ok = back.grade == T.grade and all(back.coeff(I) is c for I, c in T.coeffs.items()) and len(back.coeffs) == len(T.coeffs)
    return Case(ok, _Ops(ctx.chart).add(T=T))


# ---------------------------------------------------------------- Schouten


def _br(A, B):
    if A.grade + B.grade < 1:
        return MultiVector.zero(A.chart, 0)
    return schouten(A, B)


def _grades(rng, k, hi):
    return [rng.randint(0, hi) for _ in range(k)]


def s1_antisymmetry(ctx, rng, seed):
    a, b = _grades(rng, 2, min(2, ctx.n))
    if a + b == 0:
        b = 1
    A, B = _mv(ctx, rng, a), _mv(ctx, rng, b)
    ok = _agree(ctx, schouten(A, B), schouten(B, A) * -_sign((a - 1) * (b - 1)), seed)
    return Case(ok, _Ops(ctx.chart).add(A=A, B=B))


def s2_jacobi(ctx, rng, seed):
    a, b, c = _grades(rng, 3, min(2, ctx.n))
    A, B, C = (_mv(ctx, rng, g, small=True) for g in (a, b, c))
    g = a + b + c - 2
    if g < 0:
        return Case(True, _Ops(ctx.chart).add(A=A, B=B, C=C))
    tot = (
        _regrade(_br(A, _br(B, C)) * _sign((a - 1) * (c - 1)), g)
        + _regrade(_br(B, _br(C, A)) * _sign((b - 1) * (a - 1)), g)
        + _regrade(_br(C, _br(A, B)) * _sign((c - 1) * (b - 1)), g)
    )
    return Case(_zero(ctx, tot, seed), _Ops(ctx.chart).add(A=A, B=B, C=C))


def _zero_mv(ctx, g):
    return MultiVector.zero(ctx.chart, max(g, 0))


def s3_leibniz(ctx, rng, seed):
    # [A, B ^ C] = B ^ [A, C] + (-1)^{(a-1)c} [A, B] ^ C
    a, b, c = _grades(rng, 3, min(2, ctx.n))
    if a + b + c == 0:
        a = 1
    A, B, C = (_mv(ctx, rng, g) for g in (a, b, c))
    g = a + b + c - 1
    lhs = _br(A, wedge(B, C))
    t1 = wedge(B, _br(A, C)) if a + c >= 1 else _zero_mv(ctx, g)
    t2 = wedge(_br(A, B), C) if a + b >= 1 else _zero_mv(ctx, g)
    rhs = _regrade(t1, g) + _regrade(t2 * _sign((a - 1) * c), g)
    return Case(_agree(ctx, lhs, rhs, seed), _Ops(ctx.chart).add(A=A, B=B, C=C))


def s4_leibniz(ctx, rng, seed):
    # [A ^ B, C] = [A, C] ^ B + (-1)^{a(c-1)} A ^ [B, C]
    a, b, c = _grades(rng, 3, min(2, ctx.n))
    if a + b + c == 0:
        c = 1
    A, B, C = (_mv(ctx, rng, g) for g in (a, b, c))
    g = a + b + c - 1
    lhs = _br(wedge(A, B), C)
    t1 = wedge(_br(A, C), B) if a + c >= 1 else _zero_mv(ctx, g)
    t2 = wedge(A, _br(B, C)) if b + c >= 1 else _zero_mv(ctx, g)
    rhs = _regrade(t1, g) + _regrade(t2 * _sign(a * (c - 1)), g)
    return Case(_agree(ctx, lhs, rhs, seed), _Ops(ctx.chart).add(A=A, B=B, C=C))


def _i(A: MultiVector, eta: Form) -> Form:
    # i(A) on forms, with i(f) = multiplication and negative grades = 0
    if A.grade == 0:
        return eta * A.coeff(())
    return interior_by_vector(A, eta)


def schouten_interior(ctx, rng, seed):
    a, b = _grades(rng, 2, min(2, ctx.n))
    if a + b == 0:
        a = 1
    A, B = _mv(ctx, rng, a, small=True), _mv(ctx, rng, b, small=True)
    lo = a + b - 1
    ops = _Ops(ctx.chart).add(A=A, B=B)
    d = exterior_derivative
    AB = wedge(A, B)
    for p in range(lo, ctx.n + 1):
        eta = _fm(ctx, rng, p, small=True)
        ops.add(**{f"eta{p}": eta})
        g = p - lo
        lhs = _i(schouten(A, B), eta)
        r1 = _i(A, d(_i(B, eta)))
        r2 = _i(B, d(_i(A, eta))) * _sign((a - 1) * (b - 1))
        r3 = _i(AB, d(eta)) * _sign((a - 1) * b)
        r4 = d(_i(AB, eta)) * _sign(a * (b - 1))
        rhs = _regrade(r1, g) - _regrade(r2, g) - _regrade(r3, g) - _regrade(r4, g)
        if not _agree(ctx, _regrade(lhs, g), rhs, seed):
            return Case(False, ops)
    return Case(True, ops)


def schouten_routes(ctx, rng, seed):
    a = rng.randint(0, ctx.n)
    b = rng.randint(1 if a == 0 else 0, ctx.n)
    A, B = _mv(ctx, rng, a), _mv(ctx, rng, b)
    return Case(_agree(ctx, schouten(A, B), schouten_leibniz(A, B), seed), _Ops(ctx.chart).add(A=A, B=B))


def hamiltonian_bracket(ctx, rng, seed):
    f = _fn(ctx, rng)
    F = MultiVector.scalar(ctx.chart, f)
    ok = _agree(ctx, hamiltonian(ctx.pi, f), -schouten(F, ctx.pi.W), seed)
    return Case(ok, _Ops(ctx.chart).add(f=f))


def lie_bracket_vectors(ctx, rng, seed):
    # [X, Y]_S acts on functions as XY - YX
    X, Y, f = _mv(ctx, rng, 1), _mv(ctx, rng, 1), _fn(ctx, rng)
    from .tensor import apply_vector

    lhs = apply_vector(schouten(X, Y), f)
    rhs = apply_vector(X, apply_vector(Y, f)) - apply_vector(Y, apply_vector(X, f))
    return Case(_eq(ctx, lhs, rhs, seed), _Ops(ctx.chart).add(X=X, Y=Y, f=f))


def sharp_homomorphism(ctx, rng, seed):
    f, g = _fn(ctx, rng), _fn(ctx, rng)
    df, dg = Form.exact(ctx.chart, f), Form.exact(ctx.chart, g)
    lhs = sharp1(ctx.pi, koszul_bracket(ctx.pi, df, dg))
    rhs = schouten(sharp1(ctx.pi, df), sharp1(ctx.pi, dg))
    ok = _agree(ctx, lhs, rhs, seed)
    ok = ok and _agree(ctx, koszul_bracket(ctx.pi, df, dg), -Form.exact(ctx.chart, poisson_bracket(ctx.pi, f, g)), seed)
    return Case(ok, _Ops(ctx.chart).add(f=f, g=g))


def sharp_chain_map(ctx, rng, seed):
    # sharp_{k+1}(d eta) = d_Pi(sharp_k eta)
    k = rng.randint(0, ctx.n - 1)
    eta = _fm(ctx, rng, k)
    ok = _agree(ctx, sharp_k(ctx.pi, exterior_derivative(eta)), coboundary(ctx.pi, sharp_k(ctx.pi, eta)), seed)
    return Case(ok, _Ops(ctx.chart).add(eta=eta))


def jacobi_holds(ctx, rng, seed):
    return Case(jacobi_check(ctx.pi.W, ctx.trials, seed), _Ops(ctx.chart).add(Pi=ctx.pi.W))


# ---------------------------------------------------------------- canonical (Poisson complexes)


def coboundary_squared(ctx, rng, seed):
    ops = _Ops(ctx.chart)
    for g in range(0, ctx.n - 1):
        A = _mv(ctx, rng, g)
        ops.add(**{f"A{g}": A})
        if not _zero(ctx, coboundary(ctx.pi, coboundary(ctx.pi, A)), seed):
            return Case(False, ops)
    return Case(True, ops)


def delta_squared(ctx, rng, seed):
    ops = _Ops(ctx.chart)
    for g in range(2, ctx.n + 1):
        eta = _fm(ctx, rng, g)
        ops.add(**{f"eta{g}": eta})
        if not _zero(ctx, delta_brylinski(ctx.pi, delta_brylinski(ctx.pi, eta)), seed):
            return Case(False, ops)
    return Case(True, ops)


def delta_one_forms(ctx, rng, seed):
    f, g = _fn(ctx, rng), _fn(ctx, rng)
    eta = Form.exact(ctx.chart, g) * f
    ok = _eq(ctx, delta_brylinski(ctx.pi, eta).coeff(()), poisson_bracket(ctx.pi, f, g), seed)
    return Case(ok, _Ops(ctx.chart).add(f=f, g=g))


def pi_k_laws(ctx, rng, seed):
    k = rng.randint(0, ctx.n)
    al, be = _fm(ctx, rng, k), _fm(ctx, rng, k)
    p = pi_k(ctx.pi, al, be)
    ok = _eq(ctx, p, pi_k(ctx.pi, be, al) * _sign(k), seed)
    # Pi_k(alpha, beta) = <alpha, sharp_k beta>
    ok = ok and _eq(ctx, p, pairing(al, sharp_k(ctx.pi, be)), seed)
    return Case(ok, _Ops(ctx.chart).add(alpha=al, beta=be))


# ---------------------------------------------------------------- curl and modular


def _volumes(ctx, rng):
    """The declared volume and a random rescaling of it."""
    return [ctx.vol, ctx.vol.scaled(rg.positive(rng, ctx.chart, ctx.gen_small))]


def curl_squared(ctx, rng, seed):
    ops = _Ops(ctx.chart)
    for vol in _volumes(ctx, rng):
        ops.add(volume=vol.coefficient)
        for g in range(2, ctx.n + 1):
            A = _mv(ctx, rng, g)
            ops.add(**{f"A{g}": A})
            if not _zero(ctx, curl(vol, curl(vol, A)), seed):
                return Case(False, ops)
    return Case(True, ops)


def mu_inverse(ctx, rng, seed):
    g = rng.randint(0, ctx.n)
    A, al = _mv(ctx, rng, g), _fm(ctx, rng, ctx.n - g)
    ok = _agree(ctx, mu_sharp(ctx.vol, mu_flat(ctx.vol, A)), A, seed)
    ok = ok and _agree(ctx, mu_flat(ctx.vol, mu_sharp(ctx.vol, al)), al, seed)
    return Case(ok, _Ops(ctx.chart).add(A=A, alpha=al))


def modular_field_routes(ctx, rng, seed):
    ops = _Ops(ctx.chart)
    for vol in _volumes(ctx, rng):
        ops.add(volume=vol.coefficient)
        Xi = modular_vector_field(ctx.pi, vol)
        if not _agree(ctx, Xi, modular_vector_field_via_lie(ctx.pi, vol), seed):
            return Case(False, ops)
        if not _zero(ctx, curl(vol, Xi), seed):
            return Case(False, ops)
    return Case(True, ops)


def lambda_zero(ctx, rng, seed):
    from .tensor import apply_vector

    vol = _volumes(ctx, rng)[rng.randint(0, 1)]
    F = _fn(ctx, rng)
    lhs = modular_operator(ctx.pi, vol, MultiVector.scalar(ctx.chart, F)).coeff(())
    rhs = apply_vector(modular_vector_field(ctx.pi, vol), F)
    return Case(_eq(ctx, lhs, rhs, seed), _Ops(ctx.chart).add(volume=vol.coefficient, F=F))


def lambda_bracket(ctx, rng, seed):
    vol = _volumes(ctx, rng)[rng.randint(0, 1)]
    ops = _Ops(ctx.chart).add(volume=vol.coefficient)
    for g in range(0, ctx.n + 1):
        A = _mv(ctx, rng, g, small=True)
        ops.add(**{f"A{g}": A})
        if not _agree(ctx, modular_operator(ctx.pi, vol, A), modular_operator_bracket(ctx.pi, vol, A), seed):
            return Case(False, ops)
    return Case(True, ops)


def koszul_curl(ctx, rng, seed):
    a, b = _grades(rng, 2, min(2, ctx.n))
    if a + b == 0:
        b = 1
    A, B = _mv(ctx, rng, a, small=True), _mv(ctx, rng, b, small=True)
    ok = koszul_curl_identity_check(ctx.vol, A, B, ctx.trials, seed)
    ok = ok and curl_bracket_identity_check(ctx.vol, A, B, ctx.trials, seed)
    return Case(ok, _Ops(ctx.chart).add(A=A, B=B))


# ---------------------------------------------------------------- connection


def connection_checks(ctx, rng, seed):
    ok = all(_zero(ctx, d_pi(ctx.D, Form.basis(ctx.chart, i)), seed) for i in range(ctx.n))
    dx = [Form.basis(ctx.chart, i) for i in range(ctx.n)]
    ok = ok and all(_zero(ctx, torsion(ctx.D, dx[i], dx[j]), seed) for i, j in combinations(range(ctx.n), 2))
    return Case(ok, _Ops(ctx.chart))


def connection_linearity(ctx, rng, seed):
    g = _fn(ctx, rng, small=True)
    eta, al = _fm(ctx, rng, 1), _fm(ctx, rng, 1)
    ok = _agree(ctx, d_form(ctx.D, eta * g, al), d_form(ctx.D, eta, al) * g, seed)
    # Leibniz in the argument
    ok = ok and _agree(
        ctx,
        d_form(ctx.D, eta, al * g),
        d_form(ctx.D, eta, al) * g + al * d_multivector(ctx.D, eta, MultiVector.scalar(ctx.chart, g)).coeff(()),
        seed,
    )
    return Case(ok, _Ops(ctx.chart).add(g=g, eta=eta, alpha=al))


def connection_leibniz(ctx, rng, seed):
    a = rng.randint(0, ctx.n)
    b = rng.randint(0, ctx.n - a)
    eta, A, B = _fm(ctx, rng, 1), _mv(ctx, rng, a), _mv(ctx, rng, b)
    D = ctx.D
    lhs = d_multivector(D, eta, wedge(A, B))
    rhs = wedge(d_multivector(D, eta, A), B) + wedge(A, d_multivector(D, eta, B))
    return Case(_agree(ctx, lhs, rhs, seed), _Ops(ctx.chart).add(eta=eta, A=A, B=B))


def connection_interior(ctx, rng, seed):
    # D_eta i(alpha) A = i(alpha) D_eta A + i(D_eta alpha) A
    a = rng.randint(1, min(3, ctx.n))
    eta, al, A = _fm(ctx, rng, 1), _fm(ctx, rng, 1), _mv(ctx, rng, a)
    D = ctx.D
    lhs = d_multivector(D, eta, interior_by_form(al, A))
    rhs = interior_by_form(al, d_multivector(D, eta, A)) + interior_by_form(d_form(D, eta, al), A)
    return Case(_agree(ctx, lhs, rhs, seed), _Ops(ctx.chart).add(eta=eta, alpha=al, A=A))


def torsion_tensorial(ctx, rng, seed):
    f = _fn(ctx, rng, small=True)
    al, be = _fm(ctx, rng, 1), _fm(ctx, rng, 1)
    T = torsion(ctx.D, al, be)
    ok = _agree(ctx, torsion(ctx.D, al * f, be), T * f, seed)
    ok = ok and _agree(ctx, torsion(ctx.D, al, be * f), T * f, seed)
    return Case(ok, _Ops(ctx.chart).add(f=f, alpha=al, beta=be))


def curvature_laws(ctx, rng, seed):
    f = _fn(ctx, rng, small=True)
    al, be = _fm(ctx, rng, 1, small=True), _fm(ctx, rng, 1, small=True)
    A = _mv(ctx, rng, 1, small=True)
    D = ctx.D
    R = curvature(D, al, be, A)
    ok = _agree(ctx, curvature(D, be, al, A), -R, seed)
    ok = ok and _agree(ctx, curvature(D, al, be, A * f), R * f, seed)
    ok = ok and _agree(ctx, curvature(D, al * f, be, A), R * f, seed)
    ok = ok and _zero(ctx, curvature(D, al, al, A), seed)
    return Case(ok, _Ops(ctx.chart).add(f=f, alpha=al, beta=be, A=A))


def _flat_coefficients(ctx) -> bool:
    return ctx.D.is_flat_coefficients() and all(
        c.is_const for c in ctx.pi.W.coeffs.values()
    )


def parallel_implies_cocycle(ctx, rng, seed):
    # constant A is D-parallel when G = 0 and Pi is constant
    g = rng.randint(0, ctx.n - 1)
    A = MultiVector(
        ctx.chart, g, {I: scalar.const(rng.randint(-5, 5)) for I in combinations(range(ctx.n), g)}
    )
    dx = [Form.basis(ctx.chart, i) for i in range(ctx.n)]
    ok = all(_zero(ctx, d_multivector(ctx.D, x, A), seed) for x in dx)
    ok = ok and _zero(ctx, coboundary(ctx.pi, A), seed)
    return Case(ok, _Ops(ctx.chart).add(A=A))


# ---------------------------------------------------------------- Theorem: local coboundary


def thm4_local(ctx, rng, seed):
    ops = _Ops(ctx.chart)
    for g in range(0, ctx.n):
        A = _mv(ctx, rng, g)
        ops.add(**{f"A{g}": A})
        if not _agree(ctx, coboundary_via_connection(ctx.D, A, check=False), coboundary(ctx.pi, A), seed):
            return Case(False, ops)
    return Case(True, ops)


def _random_invertible(rng, n):
    while True:
        M = [[rng.randint(-3, 3) for _ in range(n)] for _ in range(n)]
        if scalar.det([[scalar.const(v) for v in row] for row in M]).value != 0:
            return M


def thm4_frame(ctx, rng, seed):
    M = _random_invertible(rng, ctx.n)
    frame, coframe = constant_frame(ctx.chart, M)
    g = rng.randint(0, ctx.n - 1)
    A = _mv(ctx, rng, g)
    ok = _agree(ctx, coboundary_in_frame(ctx.D, A, frame, coframe), coboundary_via_connection(ctx.D, A, check=False), seed)
    return Case(ok, _Ops(ctx.chart).add(A=A, frame=M))


# ---------------------------------------------------------------- star


def _mu(ctx):
    return ctx.S.liouville


def star_involution(ctx, rng, seed):
    k = rng.randint(0, ctx.n)
    eta = _fm(ctx, rng, k)
    return Case(_agree(ctx, star(ctx.S, star(ctx.S, eta)), eta, seed), _Ops(ctx.chart).add(eta=eta))


def star_pairing(ctx, rng, seed):
    # Pi_{2m-k}(star alpha, beta) mu = alpha ^ beta
    k = rng.randint(0, ctx.n)
    al, be = _fm(ctx, rng, k), _fm(ctx, rng, ctx.n - k)
    lhs = _mu(ctx).mu * pi_k(ctx.S.pi, star(ctx.S, al), be)
    return Case(_agree(ctx, lhs, wedge(al, be), seed), _Ops(ctx.chart).add(alpha=al, beta=be))


def star_wedge(ctx, rng, seed):
    # alpha ^ star beta = Pi_k(alpha, beta) mu = (-1)^k beta ^ star alpha
    k = rng.randint(0, ctx.n)
    al, be = _fm(ctx, rng, k), _fm(ctx, rng, k)
    mid = _mu(ctx).mu * pi_k(ctx.S.pi, al, be)
    ok = _agree(ctx, wedge(al, star(ctx.S, be)), mid, seed)
    ok = ok and _agree(ctx, mid, wedge(be, star(ctx.S, al)) * _sign(k), seed)
    return Case(ok, _Ops(ctx.chart).add(alpha=al, beta=be))


def star_mu_maps(ctx, rng, seed):
    # mu_sharp = sharp_{2m-k} o star  and  mu_flat = star o flat_k
    k = rng.randint(0, ctx.n)
    al, K = _fm(ctx, rng, k), _mv(ctx, rng, k)
    mu = _mu(ctx)
    ok = _agree(ctx, mu_sharp(mu, al), sharp_k(ctx.S.pi, star(ctx.S, al)), seed)
    ok = ok and _agree(ctx, mu_flat(mu, K), star(ctx.S, flat_k(ctx.S, K)), seed)
    return Case(ok, _Ops(ctx.chart).add(alpha=al, K=K))


def star_interior(ctx, rng, seed):
    # star(alpha ^ eta) = (-1)^k i(#alpha) star eta, alpha a 1-form
    k = rng.randint(0, ctx.n - 1)
    al, eta = _fm(ctx, rng, 1), _fm(ctx, rng, k)
    lhs = star(ctx.S, wedge(al, eta))
    rhs = interior_by_vector(sharp1(ctx.S.pi, al), star(ctx.S, eta)) * _sign(k)
    return Case(_agree(ctx, lhs, rhs, seed), _Ops(ctx.chart).add(alpha=al, eta=eta))


def star_delta(ctx, rng, seed):
    ops = _Ops(ctx.chart)
    for k in range(1, ctx.n + 1):
        eta = _fm(ctx, rng, k)
        ops.add(**{f"eta{k}": eta})
        if not _agree(ctx, delta_via_star(ctx.S, eta), delta_brylinski(ctx.S.pi, eta), seed):
            return Case(False, ops)
    return Case(True, ops)


def flat_sharp_laws(ctx, rng, seed):
    k = rng.randint(0, ctx.n)
    K, L, eta = _mv(ctx, rng, k), _mv(ctx, rng, k), _fm(ctx, rng, k)
    S = ctx.S
    ok = _agree(ctx, sharp_k(S.pi, flat_k(S, K)), K, seed)
    ok = ok and _agree(ctx, flat_k(S, sharp_k(S.pi, eta)), eta, seed)
    ok = ok and _eq(ctx, omega_k(S, K, L), pairing(flat_k(S, K), L), seed)
    # Pi_k on forms is omega_k transported by sharp_k
    be = _fm(ctx, rng, k)
    ok = ok and _eq(ctx, pi_k(S.pi, eta, be), omega_k(S, sharp_k(S.pi, eta), sharp_k(S.pi, be)), seed)
    ok = ok and _eq(ctx, pi_k(S.pi, S.liouville.mu, S.liouville.mu), ONE, seed)
    return Case(ok, _Ops(ctx.chart).add(K=K, L=L, eta=eta, beta=be))


# ---------------------------------------------------------------- induced connection and local curl


def parallel_omega(ctx, rng, seed):
    from .tensor import apply_vector

    S, D = ctx.S, ctx.D
    X, Y, Z = (_mv(ctx, rng, 1, small=True) for _ in range(3))
    w = lambda U, V: pairing(S.omega, wedge(U, V))
    lhs = apply_vector(X, w(Y, Z))
    rhs = w(induced_nabla_vector(S, D, X, Y), Z) + w(Y, induced_nabla_vector(S, D, X, Z))
    return Case(_eq(ctx, lhs, rhs, seed), _Ops(ctx.chart).add(X=X, Y=Y, Z=Z))


def pi_k_compatible(ctx, rng, seed):
    from .tensor import apply_vector

    S, D = ctx.S, ctx.D
    k = rng.randint(0, ctx.n)
    X = _mv(ctx, rng, 1, small=True)
    al, be = _fm(ctx, rng, k, small=True), _fm(ctx, rng, k, small=True)
    lhs = pi_k(S.pi, induced_nabla(S, D, X, al), be) + pi_k(S.pi, al, induced_nabla(S, D, X, be))
    rhs = apply_vector(X, pi_k(S.pi, al, be))
    return Case(_eq(ctx, lhs, rhs, seed), _Ops(ctx.chart).add(X=X, alpha=al, beta=be))


def nabla_volume_star(ctx, rng, seed):
    S, D = ctx.S, ctx.D
    X = _mv(ctx, rng, 1, small=True)
    k = rng.randint(0, ctx.n)
    eta = _fm(ctx, rng, k, small=True)
    ok = _zero(ctx, induced_nabla(S, D, X, S.liouville.mu), seed)
    ok = ok and _agree(ctx, induced_nabla(S, D, X, star(S, eta)), star(S, induced_nabla(S, D, X, eta)), seed)
    return Case(ok, _Ops(ctx.chart).add(X=X, eta=eta))


def nabla_torsion(ctx, rng, seed):
    X, Y = _mv(ctx, rng, 1), _mv(ctx, rng, 1)
    return Case(_zero(ctx, torsion_nabla(ctx.S, ctx.D, X, Y), seed), _Ops(ctx.chart).add(X=X, Y=Y))


def nabla_leibniz(ctx, rng, seed):
    S, D = ctx.S, ctx.D
    a = rng.randint(0, ctx.n)
    b = rng.randint(0, ctx.n - a)
    X = _mv(ctx, rng, 1, small=True)
    al, be = _fm(ctx, rng, a, small=True), _fm(ctx, rng, b, small=True)
    lhs = induced_nabla(S, D, X, wedge(al, be))
    rhs = wedge(induced_nabla(S, D, X, al), be) + wedge(al, induced_nabla(S, D, X, be))
    return Case(_agree(ctx, lhs, rhs, seed), _Ops(ctx.chart).add(X=X, alpha=al, beta=be))


def flat_commutes(ctx, rng, seed):
    # D_alpha(flat X) = flat(D_alpha X)
    al, X = _fm(ctx, rng, 1), _mv(ctx, rng, 1)
    ok = _agree(ctx, d_form(ctx.D, al, flat(ctx.S, X)), flat(ctx.S, d_multivector(ctx.D, al, X)), seed)
    return Case(ok, _Ops(ctx.chart).add(alpha=al, X=X))


def curl_local_formula(ctx, rng, seed):
    ops = _Ops(ctx.chart)
    for k in range(1, ctx.n + 1):
        K = _mv(ctx, rng, k)
        ops.add(**{f"K{k}": K})
        if not _agree(ctx, curl_local(ctx.S, ctx.D, K, check=False), curl(ctx.S.liouville, K), seed):
            return Case(False, ops)
    return Case(True, ops)


def _is_darboux(ctx) -> bool:
    m = ctx.n // 2
    want = {(i, m + i) for i in range(m)}
    w = ctx.S.omega.coeffs
    return set(w) == want and all(w[I] is ONE for I in want)


def curl_darboux_formula(ctx, rng, seed):
    ops = _Ops(ctx.chart)
    for k in range(1, ctx.n + 1):
        K = _mv(ctx, rng, k)
        ops.add(**{f"K{k}": K})
        if not _agree(ctx, curl_darboux(ctx.D, K), curl(ctx.S.liouville, K), seed):
            return Case(False, ops)
    return Case(True, ops)


def delta_local_formula(ctx, rng, seed):
    ops = _Ops(ctx.chart)
    for k in range(0, ctx.n + 1):
        eta = _fm(ctx, rng, k)
        ops.add(**{f"eta{k}": eta})
        if not _agree(ctx, delta_local(ctx.S, ctx.D, eta, check=False), delta_brylinski(ctx.S.pi, eta), seed):
            return Case(False, ops)
    return Case(True, ops)


# ---------------------------------------------------------------- curvature identity and changed volume


def main_identity(ctx, rng, seed):
    ops = _Ops(ctx.chart)
    for a in range(0, min(3, ctx.n) + 1):
        A = _mv(ctx, rng, a, small=True)
        ops.add(**{f"A{a}": A})
        if not _zero(ctx, modular_operator(ctx.S.pi, ctx.S.liouville, A), seed):
            return Case(False, ops)
        lhs, rhs = main_identity_sides(ctx.S, ctx.D, A)
        if not _agree(ctx, lhs, rhs, seed):
            return Case(False, ops)
        if ctx.D.is_flat_coefficients() and not (_zero(ctx, lhs, seed) and _zero(ctx, rhs, seed)):
            return Case(False, ops)
    return Case(True, ops)


def changed_volume(ctx, rng, seed):
    f = rg.nonvanishing_rational(rng, ctx.chart, ctx.gen_small)
    a = rng.randint(0, ctx.n)
    A = _mv(ctx, rng, a, small=True)
    nu = ctx.S.liouville.scaled(f)
    explicit = modular_changed_volume(ctx.S, ctx.D, f, A, check=False)
    ok = _agree(ctx, explicit, modular_operator(ctx.S.pi, nu, A), seed)
    ok = ok and _agree(ctx, explicit, modular_operator_bracket(ctx.S.pi, nu, A), seed)
    return Case(ok, _Ops(ctx.chart).add(f=f, A=A))


# ---------------------------------------------------------------- registry

_C, _ADM, _SYM, _FLAT, _DARBOUX = "connection", "admissible", "symplectic", "flat", "darboux"

_TABLE = {
    "exterior": [
        ("d-squared", d_squared, 50, ()),
        ("d-leibniz", d_leibniz, 50, ()),
        ("wedge-graded-commutative", wedge_graded, 50, ()),
        ("interior-adjoint", interior_adjoint, 50, ()),
        ("interior-wedge-rule", interior_wedge_rule, 50, ()),
        ("text-round-trip", text_round_trip, 50, ()),
    ],
    "schouten": [
        ("jacobi", jacobi_holds, 1, ()),
        ("S1-antisymmetry", s1_antisymmetry, 50, ()),
        ("S2-jacobi", s2_jacobi, 50, ()),
        ("S3-leibniz", s3_leibniz, 50, ()),
        ("S4-leibniz", s4_leibniz, 50, ()),
        ("interior-characterization", schouten_interior, 50, ()),
        ("hamiltonian", hamiltonian_bracket, 50, ()),
        ("lie-bracket", lie_bracket_vectors, 50, ()),
        ("two-routes", schouten_routes, 50, ()),
        ("sharp-homomorphism", sharp_homomorphism, 50, ()),
        ("sharp-chain-map", sharp_chain_map, 50, ()),
    ],
    "canonical": [
        ("coboundary-squared", coboundary_squared, 50, ()),
        ("delta-squared", delta_squared, 50, ()),
        ("delta-one-forms", delta_one_forms, 50, ()),
        ("pi-k-laws", pi_k_laws, 50, ()),
    ],
    "curl-modular": [
        ("curl-squared", curl_squared, 50, ()),
        ("mu-flat-sharp-inverse", mu_inverse, 50, ()),
        ("modular-field-routes", modular_field_routes, 10, ()),
        ("lambda0-is-xi", lambda_zero, 50, ()),
        ("lambda-bracket", lambda_bracket, 20, ()),
        ("curl-bracket-identities", koszul_curl, 50, ()),
    ],
    "connection": [
        ("poisson-torsion-free", connection_checks, 1, (_C,)),
        ("linearity", connection_linearity, 50, (_C,)),
        ("leibniz", connection_leibniz, 50, (_C,)),
        ("interior-commutation", connection_interior, 50, (_C,)),
        ("torsion-tensorial", torsion_tensorial, 50, (_C,)),
        ("curvature-laws", curvature_laws, 25, (_C,)),
        ("parallel-implies-cocycle", parallel_implies_cocycle, 20, (_C, _FLAT)),
    ],
    "thm4": [
        ("local-coboundary", thm4_local, 25, (_ADM,)),
        ("frame-independence", thm4_frame, 25, (_ADM,)),
    ],
    "star": [
        ("star-involution", star_involution, 50, (_SYM,)),
        ("star-pairing", star_pairing, 50, (_SYM,)),
        ("star-wedge", star_wedge, 50, (_SYM,)),
        ("star-mu-maps", star_mu_maps, 50, (_SYM,)),
        ("star-interior", star_interior, 50, (_SYM,)),
        ("delta-via-star", star_delta, 25, (_SYM,)),
        ("flat-sharp-laws", flat_sharp_laws, 50, (_SYM,)),
    ],
    "thm5-curl": [
        ("parallel-omega", parallel_omega, 25, (_SYM, _ADM)),
        ("pi-k-compatible", pi_k_compatible, 25, (_SYM, _ADM)),
        ("nabla-volume-star", nabla_volume_star, 25, (_SYM, _ADM)),
        ("nabla-torsion-free", nabla_torsion, 25, (_SYM, _ADM)),
        ("nabla-leibniz", nabla_leibniz, 25, (_SYM, _ADM)),
        ("flat-commutes", flat_commutes, 25, (_SYM, _ADM)),
        ("curl-local", curl_local_formula, 25, (_SYM, _ADM)),
        ("curl-darboux", curl_darboux_formula, 25, (_SYM, _ADM, _DARBOUX)),
        ("delta-local", delta_local_formula, 25, (_SYM, _ADM)),
    ],
    "thm5-main": [
        ("curvature-identity", main_identity, 25, (_SYM, _ADM)),
    ],
    "thm5-volume": [
        ("three-routes", changed_volume, 10, (_SYM, _ADM)),
    ],
}

SUITES: dict[str, list[Identity]] = {
    suite: [Identity(suite, name, fn, cases, needs) for name, fn, cases, needs in rows]
    for suite, rows in _TABLE.items()
}


def suite_names() -> list[str]:
    return list(SUITES) + ["all"]


def _missing(ctx: Ctx, needs) -> str | None:
    for need in needs:
        if need == _C and ctx.D is None:
            return "chart declares no connection"
        if need == _ADM:
            if ctx.D is None:
                return "chart declares no connection"
            if not ctx.admissible:
                return None  # run anyway: failures must surface, not hide
        if need == _SYM and ctx.S is None:
            return "chart declares no symplectic structure"
        if need == _FLAT and not _flat_coefficients(ctx):
            return "needs a constant Pi with vanishing Christoffel sections"
        if need == _DARBOUX and (ctx.S is None or not _is_darboux(ctx)):
            return "chart is not in Darboux form"
    return None


def run_identity(ident: Identity, ctx: Ctx, cfg: SuiteConfig) -> IdentityResult:
    n = cfg.cases if cfg.cases is not None else ident.cases
    if ident.cases == 1:
        n = 1  # structural checks have a single instance
    reason = _missing(ctx, ident.needs)
    if reason:
        return IdentityResult(ident.suite, ident.name, 0, 0, skipped=reason)
    rng = random.Random(f"{cfg.seed}:{ident.suite}:{ident.name}")
    passed = 0
    failure = None
    for idx in range(n):
        case_seed = rng.randrange(1 << 31)
        try:
            case = ident.fn(ctx, rng, case_seed)
        except scalar.SamplingError as exc:
            case = Case(False, {"error": str(exc)})
        if case.ok:
            passed += 1
        elif failure is None:
            failure = {
                "case": idx,
                "case_seed": case_seed,
                "operands": dict(case.operands),
                "chart": to_dict(ctx.bundle),
            }
    return IdentityResult(ident.suite, ident.name, n, passed, failure=failure)


def run_suite(bundle: ChartBundle, suite: str, cfg: SuiteConfig = SuiteConfig()) -> list[IdentityResult]:
    if suite != "all" and suite not in SUITES:
        raise KeyError(f"unknown suite {suite!r}; choose from {', '.join(suite_names())}")
    names = list(SUITES) if suite == "all" else [suite]
    ctx = Ctx(bundle, cfg)
    return [run_identity(ident, ctx, cfg) for name in names for ident in SUITES[name]]

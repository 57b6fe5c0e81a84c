"""Volume-form dualities, curl operators and modular operators."""

from __future__ import annotations

from dataclasses import dataclass

from . import scalar
from .scalar import Expr
from .tensor import (
    Form,
    MultiVector,
    _regrade,
    exterior_derivative,
    interior_by_form,
    interior_by_vector,
    lie_derivative_by_bivector,
    tensors_agree,
    wedge,
)
from .poisson import _pi_of, coboundary, schouten

__all__ = [
    "VolumeError",
    "VolumeForm",
    "mu_flat",
    "mu_sharp",
    "curl",
    "modular_vector_field",
    "modular_vector_field_via_lie",
    "modular_operator",
    "modular_operator_bracket",
    "koszul_curl_identity_check",
    "curl_bracket_identity_check",
]


class VolumeError(ValueError):
    """The volume coefficient vanishes identically."""


@dataclass(frozen=True, eq=False)
class VolumeForm:
    """mu = m dx^1 ^ .. ^ dx^n together with its dual mu_hat = (1/m) e_1 ^ .. ^ e_n."""

    mu: Form
    mu_hat: MultiVector

    @classmethod
    def from_coefficient(cls, chart, m: Expr, check: bool = True, trials: int = scalar.DEFAULT_TRIALS, seed: int = 0):
        if check and scalar.is_identically_zero(m, trials, seed):
            raise VolumeError("volume coefficient is identically zero")
        top = tuple(range(chart.dim))
        return cls(Form(chart, chart.dim, {top: m}), MultiVector(chart, chart.dim, {top: 1 / m}))

    @classmethod
    def standard(cls, chart):
        return cls.from_coefficient(chart, scalar.ONE, check=False)

    @property
    def chart(self):
        return self.mu.chart

    @property
    def coefficient(self) -> Expr:
        return self.mu.coeff(tuple(range(self.chart.dim)))

    def scaled(self, f: Expr) -> "VolumeForm":
        """The volume form f * mu."""
        return VolumeForm.from_coefficient(self.chart, f * self.coefficient, check=False)


def mu_flat(vol: VolumeForm, A: MultiVector) -> Form:
    """A -> i(A) mu."""
    return interior_by_vector(A, vol.mu)


def mu_sharp(vol: VolumeForm, alpha: Form) -> MultiVector:
    """Inverse of mu_flat: <beta, mu#(alpha)> = <beta ^ alpha, mu_hat>."""
    return interior_by_form(alpha, vol.mu_hat)


def curl(vol: VolumeForm, A: MultiVector) -> MultiVector:
    """The curl operator mu# o d o mu_flat, of degree -1 (zero on functions)."""
    if A.grade == 0:
        return MultiVector.zero(A.chart, 0)
    return _regrade(mu_sharp(vol, exterior_derivative(mu_flat(vol, A))), A.grade - 1)


def modular_vector_field(Pi, vol: VolumeForm) -> MultiVector:
    """Xi_mu = -curl(Pi)."""
    return -curl(vol, _pi_of(Pi))


def modular_vector_field_via_lie(Pi, vol: VolumeForm) -> MultiVector:
    """The vector field X with L_Pi mu = i(X) mu, solved through mu#."""
    return mu_sharp(vol, lie_derivative_by_bivector(_pi_of(Pi), vol.mu))


def modular_operator(Pi, vol: VolumeForm, A: MultiVector) -> MultiVector:
    """Lambda_mu A = curl(d_Pi A) - d_Pi(curl A)."""
    first = curl(vol, coboundary(Pi, A))
    if A.grade == 0:
        return _regrade(first, 0)
    second = coboundary(Pi, curl(vol, A))
    return _regrade(first, A.grade) - _regrade(second, A.grade)


def modular_operator_bracket(Pi, vol: VolumeForm, A: MultiVector) -> MultiVector:
    """(-1)^a [Xi_mu, A]_S."""
    out = schouten(modular_vector_field(Pi, vol), A)
    return -out if A.grade % 2 else out


def koszul_curl_identity_check(
    vol: VolumeForm, A: MultiVector, B: MultiVector, trials: int = scalar.DEFAULT_TRIALS, seed: int = 0
) -> bool:
    """(-1)^{(a-1)(b-1)}[A,B]_S = (-1)^b c(A^B) - c(A)^B - (-1)^b A^c(B)."""
    a, b = A.grade, B.grade
    g = a + b - 1
    lhs = schouten(A, B)
    if ((a - 1) * (b - 1)) % 2:
        lhs = -lhs
    sb = -1 if b % 2 else 1
    t1 = curl(vol, wedge(A, B))
    t2 = wedge(curl(vol, A), B) if a else MultiVector.zero(A.chart, g)
    t3 = wedge(A, curl(vol, B)) if b else MultiVector.zero(A.chart, g)
    rhs = _regrade(t1 * sb, g) - _regrade(t2, g) - _regrade(t3 * sb, g)
    return tensors_agree(_regrade(lhs, g), rhs, trials, seed)


def curl_bracket_identity_check(
    vol: VolumeForm, A: MultiVector, B: MultiVector, trials: int = scalar.DEFAULT_TRIALS, seed: int = 0
) -> bool:
    """curl [A,B]_S = [curl A, B]_S + (-1)^{a-1} [A, curl B]_S."""
    a, b = A.grade, B.grade
    g = max(a + b - 2, 0)
    lhs = curl(vol, schouten(A, B)) if a + b >= 2 else MultiVector.zero(A.chart, g)
    t1 = schouten(curl(vol, A), B) if a else MultiVector.zero(A.chart, g)
    t2 = schouten(A, curl(vol, B)) if b else MultiVector.zero(A.chart, g)
    if (a - 1) % 2:
        t2 = -t2
    return tensors_agree(_regrade(lhs, g), _regrade(t1, g) + _regrade(t2, g), trials, seed)

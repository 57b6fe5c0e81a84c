"""Symplectic charts: flat maps, the star operator, induced covariant derivatives,
local curl formulas and the curvature identities for the modular operator."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import factorial

from . import scalar
from .scalar import ONE, ZERO, Expr
from .tensor import (
    Form,
    MultiVector,
    _regrade,
    exterior_derivative,
    interior_by_form,
    interior_by_vector,
    is_zero,
    pairing,
    tensors_agree,
    wedge,
)
from .poisson import PoissonBivector, jacobi_check, pi_k, schouten, sharp1, sharp_k
from .volume import VolumeForm, curl, modular_operator, modular_operator_bracket
from .connection import ContravariantConnection, curvature, d_multivector, require_admissible

__all__ = [
    "SymplecticError",
    "SymplecticStructure",
    "flat",
    "flat_k",
    "omega_k",
    "star",
    "delta_via_star",
    "induced_nabla_vector",
    "induced_nabla",
    "torsion_nabla",
    "curl_local",
    "curl_darboux",
    "delta_local",
    "main_identity_sides",
    "main_identity_check",
    "log_derivatives",
    "modular_changed_volume",
]


class SymplecticError(ValueError):
    """An input fails a symplectic check; ``check`` names which one."""

    def __init__(self, check: str, message: str = ""):
        self.check = check
        super().__init__(message or check)


def _invert(M: list[list[Expr]], trials: int, seed: int) -> list[list[Expr]]:
    n = len(M)
    d = scalar.det(M)
    if scalar.is_identically_zero(d, trials, seed):
        raise SymplecticError("nondegenerate", "coefficient matrix is degenerate")
    inv = [[ZERO] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [[M[r][c] for c in range(n) if c != i] for r in range(n) if r != j]
            cof = scalar.det(minor) if minor else ONE
            if cof is ZERO:
                continue
            inv[i][j] = (cof if (i + j) % 2 == 0 else -cof) / d
    return inv


def _form_matrix(omega: Form) -> list[list[Expr]]:
    n = omega.dim
    return [[omega.coeff_unsorted((i, j)) if i != j else ZERO for j in range(n)] for i in range(n)]


@dataclass(frozen=True, eq=False)
class SymplecticStructure:
    """A nondegenerate closed 2-form, its inverse bivector and the Liouville volume.

    With ``W[i][j] = omega(e_i, e_j)`` and ``P[i][j] = <dx^i ^ dx^j, Pi>``,
    mutual inverseness of flat and sharp means ``P = -W^{-1}``.
    """

    omega: Form
    pi: PoissonBivector
    liouville: VolumeForm

    @property
    def chart(self):
        return self.omega.chart

    @property
    def half_dim(self) -> int:
        return self.chart.dim // 2

    def matrix(self) -> list[list[Expr]]:
        return _form_matrix(self.omega)

    @classmethod
    def from_omega(cls, omega: Form, check: bool = True, trials: int = scalar.DEFAULT_TRIALS, seed: int = 0):
        chart = omega.chart
        if omega.grade != 2:
            raise ValueError("omega must be a 2-form")
        if chart.dim % 2:
            raise SymplecticError("even-dimension", "symplectic charts have even dimension")
        if check and not is_zero(exterior_derivative(omega), trials, seed):
            raise SymplecticError("closed", "d omega does not vanish")
        inv = _invert(_form_matrix(omega), trials, seed)
        W = MultiVector(chart, 2, {(i, j): -inv[i][j] for i, j in combinations(range(chart.dim), 2)})
        return cls._assemble(omega, PoissonBivector(W, False), check, trials, seed)

    @classmethod
    def from_pi(cls, pi, check: bool = True, trials: int = scalar.DEFAULT_TRIALS, seed: int = 0):
        if isinstance(pi, MultiVector):
            pi = PoissonBivector(pi, False)
        chart = pi.chart
        if chart.dim % 2:
            raise SymplecticError("even-dimension", "symplectic charts have even dimension")
        inv = _invert(pi.matrix(), trials, seed)
        omega = Form(chart, 2, {(i, j): -inv[i][j] for i, j in combinations(range(chart.dim), 2)})
        if check and not is_zero(exterior_derivative(omega), trials, seed):
            raise SymplecticError("closed", "d omega does not vanish")
        return cls._assemble(omega, pi, check, trials, seed)

    @classmethod
    def _assemble(cls, omega, pi, check, trials, seed):
        chart = omega.chart
        m = chart.dim // 2
        top = Form.scalar(chart, ONE)
        for _ in range(m):
            top = wedge(top, omega)
        mu = top * scalar.const(scalar.Fraction(1, factorial(m)))
        if check and scalar.is_identically_zero(mu.coeff(tuple(range(chart.dim))), trials, seed):
            raise SymplecticError("nondegenerate", "Liouville form vanishes")
        vol = VolumeForm.from_coefficient(chart, mu.coeff(tuple(range(chart.dim))), check=False)
        # the Liouville form must also be the Pi-normalized volume
        if check and not scalar.equal_probabilistic(pi_k(pi, vol.mu, vol.mu), ONE, trials, seed):
            raise SymplecticError("liouville-normalization", "Pi_2m(mu, mu) != 1")
        if check and not pi.jacobi_checked and not jacobi_check(pi.W, trials, seed):
            raise SymplecticError("jacobi", "inverse bivector fails Jacobi")
        return cls(omega, PoissonBivector(pi.W, pi.jacobi_checked or check), vol)


# ---------------------------------------------------------------- flat maps and star


def flat(S: SymplecticStructure, X: MultiVector) -> Form:
    """flat(X) = i(X) omega."""
    if X.grade != 1:
        raise ValueError("flat takes a vector field")
    return interior_by_vector(X, S.omega)


def flat_k(S: SymplecticStructure, K: MultiVector) -> Form:
    """Exterior power of flat."""
    chart = K.chart
    if K.grade == 0:
        return Form(chart, 0, {(): K.coeff(())})
    cols = [flat(S, MultiVector.basis(chart, i)) for i in range(chart.dim)]
    out = Form.zero(chart, K.grade)
    for I, c in K.coeffs.items():
        prod = cols[I[0]]
        for i in I[1:]:
            prod = wedge(prod, cols[i])
        out = out + prod * c
    return out


def omega_k(S: SymplecticStructure, X: MultiVector, Y: MultiVector) -> Expr:
    """Bilinear extension of det(omega(X_i, Y_j)) to k-vectors."""
    if X.grade != Y.grade:
        raise ValueError("omega_k needs multivectors of equal grade")
    if X.grade == 0:
        return X.coeff(()) * Y.coeff(())
    W = S.matrix()
    terms = []
    for I, a in X.coeffs.items():
        for J, b in Y.coeffs.items():
            d = scalar.det([[W[i][j] for j in J] for i in I])
            if d is not ZERO:
                terms.append(a * b * d)
    return scalar.total(terms)


def star(S: SymplecticStructure, eta: Form) -> Form:
    """Symplectic star: eta -> i(sharp_k eta) mu."""
    n = S.chart.dim
    return _regrade(interior_by_vector(sharp_k(S.pi, eta), S.liouville.mu), n - eta.grade)


def delta_via_star(S: SymplecticStructure, eta: Form) -> Form:
    """(-1)^{k+1} star d star."""
    k = eta.grade
    if k == 0:
        return Form.zero(S.chart, 0)
    out = star(S, exterior_derivative(star(S, eta)))
    return out if k % 2 else -out


# ---------------------------------------------------------------- induced covariant derivative


def induced_nabla_vector(S: SymplecticStructure, D: ContravariantConnection, X: MultiVector, Y: MultiVector) -> MultiVector:
    """nabla_X Y = #(D_{flat X} flat Y)."""
    from .connection import d_form

    return sharp1(S.pi, d_form(D, flat(S, X), flat(S, Y)))


def induced_nabla(S: SymplecticStructure, D: ContravariantConnection, X: MultiVector, eta: Form) -> Form:
    """nabla_X eta = flat_k(D_{flat X} sharp_k eta) on k-forms."""
    return flat_k(S, d_multivector(D, flat(S, X), sharp_k(S.pi, eta)))


def torsion_nabla(S: SymplecticStructure, D: ContravariantConnection, X: MultiVector, Y: MultiVector) -> MultiVector:
    return (
        induced_nabla_vector(S, D, X, Y)
        - induced_nabla_vector(S, D, Y, X)
        - schouten(X, Y)
    )


# ---------------------------------------------------------------- local formulas


def _admissible(D, check, trials, seed):
    if check:
        require_admissible(D, trials, seed)


def curl_local(
    S: SymplecticStructure, D: ContravariantConnection, K: MultiVector,
    check: bool = True, trials: int = scalar.DEFAULT_TRIALS, seed: int = 0,
) -> MultiVector:
    """-sum_i i(flat e_i) D_{dx^i} K, the curl for the Liouville volume."""
    _admissible(D, check, trials, seed)
    chart = K.chart
    g = max(K.grade - 1, 0)
    out = MultiVector.zero(chart, g)
    if K.grade == 0:
        return out
    for i in range(chart.dim):
        term = interior_by_form(flat(S, MultiVector.basis(chart, i)), d_multivector(D, Form.basis(chart, i), K))
        out = out - _regrade(term, g)
    return out


def curl_darboux(D: ContravariantConnection, K: MultiVector) -> MultiVector:
    """sum_i i(dx_i) D_{dy_i} - i(dy_i) D_{dx_i} for coordinates (x_1..x_m, y_1..y_m)."""
    chart = K.chart
    m = chart.dim // 2
    g = max(K.grade - 1, 0)
    out = MultiVector.zero(chart, g)
    if K.grade == 0:
        return out
    for i in range(m):
        dx, dy = Form.basis(chart, i), Form.basis(chart, m + i)
        out = out + _regrade(interior_by_form(dx, d_multivector(D, dy, K)), g)
        out = out - _regrade(interior_by_form(dy, d_multivector(D, dx, K)), g)
    return out


def delta_local(
    S: SymplecticStructure, D: ContravariantConnection, eta: Form,
    check: bool = True, trials: int = scalar.DEFAULT_TRIALS, seed: int = 0,
) -> Form:
    """sum_i i(e_i) nabla_{#dx^i} eta."""
    _admissible(D, check, trials, seed)
    chart = eta.chart
    g = max(eta.grade - 1, 0)
    out = Form.zero(chart, g)
    if eta.grade == 0:
        return out
    for i in range(chart.dim):
        X = sharp1(S.pi, Form.basis(chart, i))
        out = out + _regrade(interior_by_vector(MultiVector.basis(chart, i), induced_nabla(S, D, X, eta)), g)
    return out


def _e_wedge_flat_interior(S, chart, i, j, A):
    # e_i ^ i(flat e_j) A, a grade-preserving operator
    inner = interior_by_form(flat(S, MultiVector.basis(chart, j)), A)
    if A.grade == 0:
        return MultiVector.zero(chart, 0)
    return _regrade(wedge(MultiVector.basis(chart, i), inner), A.grade)


def main_identity_sides(S: SymplecticStructure, D: ContravariantConnection, A: MultiVector):
    """Both sides of the curvature identity satisfied by a torsion-free Poisson connection:

    (-1)^a sum_{i<j} w_ij R(dx^i, dx^j) A  and  sum_{i,j} e_i ^ i(flat e_j) R(dx^i, dx^j) A.
    """
    chart = A.chart
    n = chart.dim
    W = S.matrix()
    dx = [Form.basis(chart, i) for i in range(n)]
    R = {}
    for i, j in combinations(range(n), 2):
        R[(i, j)] = curvature(D, dx[i], dx[j], A)
    lhs = MultiVector.zero(chart, A.grade)
    rhs = MultiVector.zero(chart, A.grade)
    for (i, j), RA in R.items():
        if W[i][j] is not ZERO:
            lhs = lhs + _regrade(RA, A.grade) * W[i][j]
        # R(dx^j, dx^i) = -R(dx^i, dx^j)
        rhs = rhs + _e_wedge_flat_interior(S, chart, i, j, RA) - _e_wedge_flat_interior(S, chart, j, i, RA)
    if A.grade % 2:
        lhs = -lhs
    return lhs, rhs


def main_identity_check(
    S: SymplecticStructure, D: ContravariantConnection, A: MultiVector,
    check: bool = True, trials: int = scalar.DEFAULT_TRIALS, seed: int = 0,
) -> bool:
    """Compare both sides, after confirming the Liouville modular operator vanishes on A."""
    _admissible(D, check, trials, seed)
    if not is_zero(modular_operator(S.pi, S.liouville, A), trials, seed):
        return False
    lhs, rhs = main_identity_sides(S, D, A)
    return tensors_agree(lhs, rhs, trials, seed)


# ---------------------------------------------------------------- changed volume


def log_derivatives(S: SymplecticStructure, f: Expr) -> list[Expr]:
    """F_i = ((#dx^i) f) / f, the derivative of log|f| along #dx^i."""
    chart = S.chart
    out = []
    for i in range(chart.dim):
        X = sharp1(S.pi, Form.basis(chart, i))
        num = scalar.total(c * scalar.partial(f, I[0]) for I, c in X.coeffs.items())
        out.append(num / f)
    return out


def modular_changed_volume(
    S: SymplecticStructure, D: ContravariantConnection, f: Expr, A: MultiVector,
    check: bool = True, trials: int = scalar.DEFAULT_TRIALS, seed: int = 0,
) -> MultiVector:
    """Modular operator for nu = f * liouville through the local connection formula.

    Lambda_nu A = (-1)^a sum_ij F_i w_ij D_{dx^j} A
                + sum_ij (sum_k F_k G^{ij}_k - (#dx^i) F_j) e_i ^ i(flat e_j) A.
    """
    if check and scalar.is_identically_zero(f, trials, seed):
        raise ValueError("f vanishes identically")
    _admissible(D, check, trials, seed)
    chart = A.chart
    n = chart.dim
    a = A.grade
    W = S.matrix()
    F = log_derivatives(S, f)
    dx = [Form.basis(chart, i) for i in range(n)]
    first = MultiVector.zero(chart, a)
    for j in range(n):
        c = scalar.total(F[i] * W[i][j] for i in range(n) if W[i][j] is not ZERO)
        if c is not ZERO:
            first = first + d_multivector(D, dx[j], A) * c
    if a % 2:
        first = -first
    second = MultiVector.zero(chart, a)
    sharps = [sharp1(S.pi, dx[i]) for i in range(n)]
    for i in range(n):
        for j in range(n):
            c = scalar.total(F[k] * D.gamma[i][j][k] for k in range(n))
            c = c - scalar.total(v * scalar.partial(F[j], I[0]) for I, v in sharps[i].coeffs.items())
            if c is ZERO:
                continue
            second = second + _e_wedge_flat_interior(S, chart, i, j, A) * c
    return first + second

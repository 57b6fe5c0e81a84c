"""Poisson bivectors, sharp maps, Schouten brackets and the two Poisson complexes."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from . import scalar
from .scalar import ONE, ZERO, Expr, partial
from .tensor import (
    Form,
    MultiVector,
    _regrade,
    apply_vector,
    pairing,
    sort_sign,
    tensors_agree,
    wedge,
    is_zero,
)

__all__ = [
    "JacobiError",
    "PoissonBivector",
    "sharp1",
    "sharp_k",
    "pi_k",
    "poisson_bracket",
    "hamiltonian",
    "schouten",
    "schouten_leibniz",
    "jacobi_check",
    "r3_jacobi_condition",
    "coboundary",
    "delta_brylinski",
]


class JacobiError(ValueError):
    """The bivector fails [W, W]_S = 0."""


@dataclass(frozen=True, eq=False)
class PoissonBivector:
    W: MultiVector
    jacobi_checked: bool = False

    @classmethod
    def from_bivector(cls, W: MultiVector, check: bool = True, trials: int = scalar.DEFAULT_TRIALS, seed: int = 0):
        """Wrap ``W``; with ``check`` the Jacobi identity must hold."""
        if W.grade != 2:
            raise ValueError("a Poisson bivector has grade 2")
        if check and not jacobi_check(W, trials, seed):
            raise JacobiError("[W, W]_S does not vanish")
        return cls(W, check)

    @property
    def chart(self):
        return self.W.chart

    def entry(self, i: int, j: int) -> Expr:
        """<dx^i ^ dx^j, Pi>, antisymmetric in (i, j)."""
        return self.W.coeff_unsorted((i, j))

    def matrix(self) -> list[list[Expr]]:
        n = self.chart.dim
        return [[self.entry(i, j) for j in range(n)] for i in range(n)]


def _pi_of(Pi) -> MultiVector:
    return Pi.W if isinstance(Pi, PoissonBivector) else Pi


def _entry(Pi, i, j) -> Expr:
    return _pi_of(Pi).coeff_unsorted((i, j))


def sharp1(Pi, alpha: Form) -> MultiVector:
    """The vector field with beta(#alpha) = <beta ^ alpha, Pi> for all beta."""
    if alpha.grade != 1:
        raise ValueError("sharp1 takes a 1-form")
    n = alpha.dim
    comps = {}
    for j in range(n):
        c = scalar.total(a * _entry(Pi, j, I[0]) for I, a in alpha.coeffs.items())
        comps[(j,)] = c
    return MultiVector(alpha.chart, 1, comps)


def sharp_k(Pi, eta: Form) -> MultiVector:
    """Exterior power of sharp: dx^{i1}^..^dx^{ik} -> #dx^{i1} ^ .. ^ #dx^{ik}."""
    chart = eta.chart
    if eta.grade == 0:
        return MultiVector(chart, 0, {(): eta.coeff(())})
    cols = [sharp1(Pi, Form.basis(chart, i)) for i in range(chart.dim)]
    out = MultiVector.zero(chart, eta.grade)
    for I, c in eta.coeffs.items():
        prod = cols[I[0]]
        for i in I[1:]:
            prod = wedge(prod, cols[i])
        out = out + prod * c
    return out


def pi_k(Pi, alpha: Form, beta: Form) -> Expr:
    """Pi_k(alpha, beta): bilinear extension of det(<alpha_i ^ beta_j, Pi>)."""
    if alpha.grade != beta.grade:
        raise ValueError("pi_k needs forms of equal grade")
    k = alpha.grade
    if k == 0:
        return alpha.coeff(()) * beta.coeff(())
    terms = []
    for I, a in alpha.coeffs.items():
        for J, b in beta.coeffs.items():
            d = scalar.det([[_entry(Pi, i, j) for j in J] for i in I])
            if d is not ZERO:
                terms.append(a * b * d)
    return scalar.total(terms)


def poisson_bracket(Pi, f: Expr, g: Expr) -> Expr:
    """{f, g} = <df ^ dg, Pi>."""
    chart = _pi_of(Pi).chart
    return pairing(wedge(Form.exact(chart, f), Form.exact(chart, g)), _pi_of(Pi))


def hamiltonian(Pi, f: Expr) -> MultiVector:
    """H_f = #df."""
    return sharp1(Pi, Form.exact(_pi_of(Pi).chart, f))


# ---------------------------------------------------------------- Schouten, shuffle route


def _evaluate_on(A: MultiVector, forms: list[Form]) -> Expr:
    """A(F_1, .., F_a) = <dF_1 ^ .. ^ dF_a, A> given the 1-forms dF_i."""
    if A.grade == 0:
        return A.coeff(())
    w = forms[0]
    for f in forms[1:]:
        w = wedge(w, f)
    return pairing(w, A)


def _shuffle_sign(S: tuple[int, ...]) -> int:
    # sign of the (p, q)-shuffle placing positions S first
    return -1 if (sum(S) - len(S) * (len(S) - 1) // 2) % 2 else 1


def schouten(A: MultiVector, B: MultiVector) -> MultiVector:
    """[A, B]_S from the shuffle-sum definition evaluated on coordinates.

    Component I is [A, B]_S(x_{i1}, .., x_{ic}); multiderivation linearity
    makes this the coefficient of e_I.
    """
    A._check(B)
    chart = A.chart
    a, b = A.grade, B.grade
    c = a + b - 1
    if c < 0 or c > chart.dim:
        return MultiVector.zero(chart, max(c, 0))
    dx = [Form.basis(chart, i) for i in range(chart.dim)]
    sign2 = -1 if ((a - 1) * (b - 1)) % 2 == 0 else 1
    out = {}
    for I in combinations(range(chart.dim), c):
        acc = ZERO
        if a >= 1:
            for S in combinations(range(c), b):
                rest = tuple(p for p in range(c) if p not in S)
                inner = B.coeff(tuple(I[p] for p in S))
                if inner is ZERO:
                    continue
                val = _evaluate_on(A, [Form.exact(chart, inner)] + [dx[I[p]] for p in rest])
                acc = acc + val if _shuffle_sign(S) == 1 else acc - val
        if b >= 1:
            for S in combinations(range(c), a):
                rest = tuple(p for p in range(c) if p not in S)
                inner = A.coeff(tuple(I[p] for p in S))
                if inner is ZERO:
                    continue
                val = _evaluate_on(B, [Form.exact(chart, inner)] + [dx[I[p]] for p in rest])
                s = _shuffle_sign(S) * sign2
                acc = acc + val if s == 1 else acc - val
        out[I] = acc
    return MultiVector(chart, c, out)


# ---------------------------------------------------------------- Schouten, Leibniz route
#
# Independent reduction through (S3)/(S4) down to Lie brackets of vector
# fields and directional derivatives.  Monomials are (coefficient, indices).


def _mono(chart, f: Expr, I: tuple[int, ...]) -> MultiVector:
    return MultiVector.from_unsorted(chart, len(I), [(I, f)])


def _vec_function(chart, f: Expr, i: int, g: Expr) -> Expr:
    # [f e_i, g]_S = (f e_i) g
    return f * partial(g, i)


def _lie(chart, f: Expr, i: int, g: Expr, j: int) -> MultiVector:
    # [f e_i, g e_j] = f (d_i g) e_j - g (d_j f) e_i
    return MultiVector.from_unsorted(chart, 1, [((j,), f * partial(g, i)), ((i,), -(g * partial(f, j)))])


def _fn_mono(chart, f: Expr, g: Expr, J: tuple[int, ...]) -> MultiVector:
    """[f, g e_J]_S for a function f."""
    b = len(J)
    if b == 0:
        return MultiVector.zero(chart, 0)
    # [f, Y ^ C] = Y ^ [f, C] + (-1)^{-c} [f, Y] ^ C   with Y = g e_{j1}, C = e_{J[1:]}
    rest = J[1:]
    fY = -_vec_function(chart, g, J[0], f)  # [f, Y] = -[Y, f]
    second = _mono(chart, fY, rest)
    if len(rest) % 2:
        second = -second
    if not rest:
        return second
    first = wedge(_mono(chart, g, J[:1]), _fn_mono(chart, f, ONE, rest))
    return _regrade(first, b - 1) + second


def _vec_mono(chart, f: Expr, i: int, g: Expr, J: tuple[int, ...]) -> MultiVector:
    """[f e_i, g e_J]_S for a vector field."""
    b = len(J)
    if b == 0:
        return MultiVector(chart, 0, {(): _vec_function(chart, f, i, g)})
    Y_lie = _lie(chart, f, i, g, J[0])
    rest = J[1:]
    if not rest:
        return Y_lie
    # [X, Y ^ C] = Y ^ [X, C] + [X, Y] ^ C
    Y = _mono(chart, g, J[:1])
    first = wedge(Y, _vec_mono(chart, f, i, ONE, rest))
    second = wedge(Y_lie, _mono(chart, ONE, rest))
    return first + second


def _bracket_mono(chart, f: Expr, I: tuple[int, ...], g: Expr, J: tuple[int, ...]) -> MultiVector:
    a, c = len(I), len(J)
    if a == 0:
        return _fn_mono(chart, f, g, J)
    if a == 1:
        return _vec_mono(chart, f, I[0], g, J)
    # [X ^ A', C] = [X, C] ^ A' + (-1)^{c-1} X ^ [A', C]   with X = f e_{i1}, A' = e_{I[1:]}
    X = _mono(chart, f, I[:1])
    A_rest = _mono(chart, ONE, I[1:])
    first = wedge(_vec_mono(chart, f, I[0], g, J), A_rest)
    second = wedge(X, _bracket_mono(chart, ONE, I[1:], g, J))
    if (c - 1) % 2:
        second = -second
    target = a + c - 1
    return _regrade(first, target) + _regrade(second, target)


def schouten_leibniz(A: MultiVector, B: MultiVector) -> MultiVector:
    """[A, B]_S by recursive Leibniz reduction; cross-check for ``schouten``."""
    A._check(B)
    chart = A.chart
    c = A.grade + B.grade - 1
    if c < 0 or c > chart.dim:
        return MultiVector.zero(chart, max(c, 0))
    out = MultiVector.zero(chart, c)
    for I, f in A.coeffs.items():
        for J, g in B.coeffs.items():
            out = out + _regrade(_bracket_mono(chart, f, I, g, J), c)
    return out


# ---------------------------------------------------------------- complexes


def jacobi_check(W: MultiVector, trials: int = scalar.DEFAULT_TRIALS, seed: int = 0) -> bool:
    """True iff [W, W]_S vanishes (probabilistically)."""
    return is_zero(schouten(W, W), trials, seed)


def r3_jacobi_condition(W: MultiVector) -> Expr:
    """f(h_x - g_y) + g(f_y - h_z) + h(g_z - f_x) for W = f e12 + g e23 + h e31."""
    if W.dim != 3 or W.grade != 2:
        raise ValueError("the displayed condition is for bivectors on a 3-chart")
    f = W.coeff((0, 1))
    g = W.coeff((1, 2))
    h = W.coeff_unsorted((2, 0))
    x, y, z = 0, 1, 2
    return (
        f * (partial(h, x) - partial(g, y))
        + g * (partial(f, y) - partial(h, z))
        + h * (partial(g, z) - partial(f, x))
    )


def coboundary(Pi, A: MultiVector) -> MultiVector:
    """Lichnerowicz coboundary d_Pi A = -[A, Pi]_S."""
    return -schouten(A, _pi_of(Pi))


def delta_brylinski(Pi, eta: Form) -> Form:
    """Brylinski's degree -1 operator, applied to phi_0 dx^{i1} ^ .. ^ dx^{ik} termwise."""
    chart = eta.chart
    k = eta.grade
    if k == 0:
        return Form.zero(chart, 0)
    n = chart.dim
    terms = []
    for I, phi0 in eta.coeffs.items():
        for l in range(k):
            rest = I[:l] + I[l + 1 :]
            # {phi0, x_j} = sum_i d_i phi0 Pi^{ij}
            br = scalar.total(partial(phi0, i) * _entry(Pi, i, I[l]) for i in range(n))
            terms.append((rest, br if l % 2 == 0 else -br))
        for l in range(k):
            for m in range(l + 1, k):
                pij = _entry(Pi, I[l], I[m])
                if pij is ZERO:
                    continue
                rest = tuple(I[p] for p in range(k) if p != l and p != m)
                s = 1 if (l + m) % 2 == 0 else -1
                for r in range(n):
                    d = partial(pij, r)
                    if d is ZERO:
                        continue
                    c = phi0 * d
                    terms.append(((r,) + rest, c if s == 1 else -c))
    return Form.from_unsorted(chart, k - 1, terms)

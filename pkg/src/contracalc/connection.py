"""Contravariant derivatives on a Poisson chart.

A connection is given on the coordinate coframe by Christoffel sections,
``D_{dx^i} dx^j = sum_k gamma[i][j][k] dx^k`` (0-based indices).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

from . import scalar
from .scalar import ZERO, Expr, partial
from .tensor import (
    Form,
    MultiVector,
    _regrade,
    apply_vector,
    exterior_derivative,
    is_zero,
    lie_derivative_form,
    pairing,
    wedge,
)
from .poisson import PoissonBivector, _entry, sharp1

__all__ = [
    "PreconditionError",
    "ContravariantConnection",
    "d_form",
    "d_multivector",
    "d_pi",
    "is_poisson_connection",
    "koszul_bracket",
    "torsion",
    "is_torsion_free",
    "curvature",
    "coboundary_via_connection",
    "coboundary_in_frame",
    "build_trivial",
    "build_2d_canonical",
    "build_darboux_symmetric",
    "darboux_bivector",
    "constant_frame",
    "require_admissible",
]


class PreconditionError(ValueError):
    """A connection fails a check an operation requires."""

    def __init__(self, check: str, message: str = ""):
        self.check = check
        super().__init__(message or f"connection check failed: {check}")


@dataclass(frozen=True, eq=False)
class ContravariantConnection:
    pi: PoissonBivector
    gamma: tuple  # gamma[i][j][k]

    def __post_init__(self):
        n = self.pi.chart.dim
        g = tuple(tuple(tuple(scalar._lift(e) for e in row) for row in plane) for plane in self.gamma)
        if len(g) != n or any(len(p) != n or any(len(r) != n for r in p) for p in g):
            raise ValueError(f"Christoffel array must be {n}x{n}x{n}")
        object.__setattr__(self, "gamma", g)

    @classmethod
    def from_entries(cls, pi: PoissonBivector, entries: dict[tuple[int, int, int], Expr]):
        n = pi.chart.dim
        g = [[[ZERO] * n for _ in range(n)] for _ in range(n)]
        for (i, j, k), e in entries.items():
            g[i][j][k] = scalar._lift(e)
        return cls(pi, g)

    @property
    def chart(self):
        return self.pi.chart

    def entries(self) -> dict[tuple[int, int, int], Expr]:
        n = self.chart.dim
        return {
            (i, j, k): self.gamma[i][j][k]
            for i in range(n)
            for j in range(n)
            for k in range(n)
            if self.gamma[i][j][k] is not ZERO
        }

    def is_flat_coefficients(self) -> bool:
        return not self.entries()


def _dual_action(D: ContravariantConnection, eta: Form) -> list[list[Expr]]:
    """c[j][k] with D_eta dx^j = sum_k c[j][k] dx^k (eta enters C-linearly)."""
    n = D.chart.dim
    return [
        [scalar.total(eta.coeff((i,)) * D.gamma[i][j][k] for i in range(n)) for k in range(n)]
        for j in range(n)
    ]


def d_form(D: ContravariantConnection, eta: Form, alpha: Form) -> Form:
    """D_eta alpha for 1-forms eta, alpha."""
    if eta.grade != 1 or alpha.grade != 1:
        raise ValueError("d_form takes two 1-forms")
    chart = alpha.chart
    n = chart.dim
    X = sharp1(D.pi, eta)
    c = _dual_action(D, eta)
    comps = {}
    for k in range(n):
        terms = [apply_vector(X, alpha.coeff((k,)))]
        terms += [alpha.coeff((j,)) * c[j][k] for j in range(n) if (j,) in alpha.coeffs]
        comps[(k,)] = scalar.total(terms)
    return Form(chart, 1, comps)


def d_multivector(D: ContravariantConnection, eta: Form, A: MultiVector) -> MultiVector:
    """Extension of D_eta to multivectors via

    <a_1^..^a_a, D_eta A> = (#eta)<a_1^..^a_a, A> - sum_i <a_1^..^D_eta a_i^..^a_a, A>.
    """
    if eta.grade != 1:
        raise ValueError("direction must be a 1-form")
    chart = A.chart
    n = chart.dim
    X = sharp1(D.pi, eta)
    if A.grade == 0:
        return MultiVector(chart, 0, {(): apply_vector(X, A.coeff(()))})
    c = _dual_action(D, eta)
    out = {}
    for J in combinations(range(n), A.grade):
        terms = [apply_vector(X, A.coeff(J))]
        for pos, j in enumerate(J):
            for k in range(n):
                if c[j][k] is ZERO:
                    continue
                seq = J[:pos] + (k,) + J[pos + 1 :]
                val = A.coeff_unsorted(seq)
                if val is not ZERO:
                    terms.append(-(c[j][k] * val))
        out[J] = scalar.total(terms)
    return MultiVector(chart, A.grade, out)


def d_pi(D: ContravariantConnection, alpha: Form) -> MultiVector:
    """D_alpha Pi, assembled from <beta^gamma, D_alpha Pi> on coordinate pairs."""
    chart = D.chart
    n = chart.dim
    X = sharp1(D.pi, alpha)
    dx = [Form.basis(chart, i) for i in range(n)]
    Dx = [d_form(D, alpha, dx[i]) for i in range(n)]
    W = D.pi.W
    out = {}
    for i, j in combinations(range(n), 2):
        val = (
            apply_vector(X, _entry(D.pi, i, j))
            - pairing(wedge(Dx[i], dx[j]), W)
            - pairing(wedge(dx[i], Dx[j]), W)
        )
        out[(i, j)] = val
    return MultiVector(chart, 2, out)


def is_poisson_connection(D: ContravariantConnection, trials: int = scalar.DEFAULT_TRIALS, seed: int = 0) -> bool:
    """D Pi = 0 in every coordinate direction."""
    chart = D.chart
    return all(is_zero(d_pi(D, Form.basis(chart, i)), trials, seed) for i in range(chart.dim))


def koszul_bracket(Pi, alpha: Form, beta: Form) -> Form:
    """[alpha, beta]_Pi = L_{#alpha} beta - L_{#beta} alpha + d<alpha^beta, Pi>."""
    W = Pi.W if isinstance(Pi, PoissonBivector) else Pi
    first = lie_derivative_form(sharp1(Pi, alpha), beta)
    second = lie_derivative_form(sharp1(Pi, beta), alpha)
    third = exterior_derivative(Form.scalar(alpha.chart, pairing(wedge(alpha, beta), W)))
    return first - second + third


def torsion(D: ContravariantConnection, alpha: Form, beta: Form) -> Form:
    """T_D(alpha, beta) = D_alpha beta - D_beta alpha - [alpha, beta]_Pi."""
    return d_form(D, alpha, beta) - d_form(D, beta, alpha) - koszul_bracket(D.pi, alpha, beta)


def is_torsion_free(D: ContravariantConnection, trials: int = scalar.DEFAULT_TRIALS, seed: int = 0) -> bool:
    chart = D.chart
    dx = [Form.basis(chart, i) for i in range(chart.dim)]
    return all(
        is_zero(torsion(D, dx[i], dx[j]), trials, seed)
        for i, j in combinations(range(chart.dim), 2)
    )


def curvature(D: ContravariantConnection, alpha: Form, beta: Form, A: MultiVector) -> MultiVector:
    """R_D(alpha, beta) A = D_a D_b A - D_b D_a A - D_{[a, b]_Pi} A."""
    ab = d_multivector(D, alpha, d_multivector(D, beta, A))
    ba = d_multivector(D, beta, d_multivector(D, alpha, A))
    br = d_multivector(D, koszul_bracket(D.pi, alpha, beta), A)
    return ab - ba - br


def require_admissible(D: ContravariantConnection, trials: int = scalar.DEFAULT_TRIALS, seed: int = 0) -> None:
    """Raise PreconditionError unless D is a torsion-free Poisson connection."""
    if not is_poisson_connection(D, trials, seed):
        raise PreconditionError("poisson-connection", "D Pi does not vanish")
    if not is_torsion_free(D, trials, seed):
        raise PreconditionError("torsion-free", "the torsion of D does not vanish")


def coboundary_in_frame(
    D: ContravariantConnection,
    A: MultiVector,
    frame: Sequence[MultiVector],
    coframe: Sequence[Form],
) -> MultiVector:
    """-sum_i f_i ^ D_{xi^i} A for a frame and its dual coframe."""
    out = MultiVector.zero(A.chart, A.grade + 1)
    for f, xi in zip(frame, coframe):
        out = out - _regrade(wedge(f, d_multivector(D, xi, A)), A.grade + 1)
    return out


def coboundary_via_connection(
    D: ContravariantConnection, A: MultiVector, check: bool = True, trials: int = scalar.DEFAULT_TRIALS, seed: int = 0
) -> MultiVector:
    """The local formula -sum_i e_i ^ D_{dx^i} A for the Poisson coboundary."""
    if check:
        require_admissible(D, trials, seed)
    chart = A.chart
    frame = [MultiVector.basis(chart, i) for i in range(chart.dim)]
    coframe = [Form.basis(chart, i) for i in range(chart.dim)]
    return coboundary_in_frame(D, A, frame, coframe)


def constant_frame(chart, matrix: Sequence[Sequence]) -> tuple[list[MultiVector], list[Form]]:
    """Frame f_j = sum_i M[i][j] e_i and its dual coframe, for invertible constant M."""
    from fractions import Fraction

    n = chart.dim
    M = [[Fraction(v) for v in row] for row in matrix]
    inv = _invert_rational(M)
    frame = [MultiVector(chart, 1, {(i,): M[i][j] for i in range(n)}) for j in range(n)]
    coframe = [Form(chart, 1, {(k,): inv[j][k] for k in range(n)}) for j in range(n)]
    return frame, coframe


def _invert_rational(M):
    from fractions import Fraction

    n = len(M)
    aug = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(M)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if pivot is None:
            raise ValueError("frame matrix is singular")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        p = aug[col][col]
        aug[col] = [v / p for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                m = aug[r][col]
                aug[r] = [a - m * b for a, b in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


# ---------------------------------------------------------------- builders


def build_trivial(pi: PoissonBivector) -> ContravariantConnection:
    """Gamma = 0; admissible exactly when Pi has constant coefficients."""
    return ContravariantConnection.from_entries(pi, {})


def build_2d_canonical(pi: PoissonBivector, trials: int = scalar.DEFAULT_TRIALS, seed: int = 0) -> ContravariantConnection:
    """A torsion-free Poisson connection for Pi = phi e_1 ^ e_2 on a 2-chart.

    The solution family is underdetermined; this one sets
    G^{11}_1 = -phi_y, G^{12}_1 = -phi_x, G^{21}_2 = phi_y, G^{22}_2 = phi_x
    and every other entry to zero.
    """
    if pi.chart.dim != 2:
        raise ValueError("build_2d_canonical needs a 2-chart")
    phi = pi.W.coeff((0, 1))
    if scalar.is_identically_zero(phi, trials, seed):
        raise ValueError("phi is identically zero")
    px, py = partial(phi, 0), partial(phi, 1)
    return ContravariantConnection.from_entries(
        pi,
        {(0, 0, 0): -py, (0, 1, 0): -px, (1, 0, 1): py, (1, 1, 1): px},
    )


def darboux_bivector(chart) -> PoissonBivector:
    """Pi = sum_i e_{x_i} ^ e_{y_i} for coordinates (x_1..x_m, y_1..y_m)."""
    n = chart.dim
    if n % 2:
        raise ValueError("Darboux chart needs even dimension")
    m = n // 2
    return PoissonBivector.from_bivector(
        MultiVector(chart, 2, {(i, m + i): scalar.ONE for i in range(m)}), check=False
    )


def build_darboux_symmetric(
    chart, S, trials: int = scalar.DEFAULT_TRIALS, seed: int = 0
) -> ContravariantConnection:
    """Connection induced by the symplectic connection with omega(nabla_a e_b, e_c) = S_abc.

    ``S`` is an n x n x n nested sequence (or a sparse dict keyed by index
    triples) and must be totally symmetric. With constant Pi the conversion
    D_alpha beta = flat(nabla_{#alpha} #beta) collapses to
    G^{ij}_k = sum_{a,b} P[a][i] P[b][j] S_abk.
    """
    pi = darboux_bivector(chart)
    n = chart.dim
    if isinstance(S, dict):
        arr = [[[ZERO] * n for _ in range(n)] for _ in range(n)]
        for (a, b, c), e in S.items():
            arr[a][b][c] = scalar._lift(e)
    else:
        arr = [[[scalar._lift(e) for e in row] for row in plane] for plane in S]
    for a in range(n):
        for b in range(n):
            for c in range(n):
                for p, q, r in ((b, a, c), (a, c, b)):
                    u, v = arr[a][b][c], arr[p][q][r]
                    if u is not v and not scalar.equal_probabilistic(u, v, trials, seed):
                        raise ValueError(f"S is not symmetric at {(a + 1, b + 1, c + 1)}")
    P = pi.matrix()
    entries = {}
    for i in range(n):
        for j in range(n):
            for k in range(n):
                terms = [
                    P[a][i] * P[b][j] * arr[a][b][k]
                    for a in range(n)
                    if P[a][i] is not ZERO
                    for b in range(n)
                    if P[b][j] is not ZERO
                ]
                val = scalar.total(terms)
                if val is not ZERO:
                    entries[(i, j, k)] = val
    return ContravariantConnection.from_entries(pi, entries)

"""Multivector fields and differential forms on a chart.

Both are stored as maps from strictly increasing 0-based index tuples to
scalar expressions.  The pairing is the determinant one,
``<dx^I, e_J> = delta_{IJ}`` with no 1/k! factor, and every sign is produced
by explicit transposition counting in ``sort_sign``.
"""

from __future__ import annotations

from itertools import combinations
from typing import Iterable, Mapping

from . import scalar
from .scalar import ONE, ZERO, Chart, Expr, ParseError, partial

__all__ = [
    "MultiVector",
    "Form",
    "sort_sign",
    "wedge",
    "pairing",
    "interior_by_vector",
    "interior_by_form",
    "exterior_derivative",
    "lie_derivative_by_bivector",
    "lie_derivative_form",
    "apply_vector",
    "tensors_agree",
    "is_zero",
    "parse_tensor",
    "tensor_text",
]


def sort_sign(indices: Iterable[int]) -> tuple[int, tuple[int, ...]]:
    """Sign of the sorting permutation and the sorted tuple.

    Returns sign 0 when an index repeats.
    """
    seq = list(indices)
    sign = 1
    # insertion sort, counting transpositions
    for i in range(1, len(seq)):
        j = i
        while j > 0 and seq[j - 1] > seq[j]:
            seq[j - 1], seq[j] = seq[j], seq[j - 1]
            sign = -sign
            j -= 1
        if j > 0 and seq[j - 1] == seq[j]:
            return 0, ()
    return sign, tuple(seq)


def _scaled(sign: int, e: Expr) -> Expr:
    return e if sign == 1 else -e


class _Alternating:
    """Common storage for grade-k alternating tensors."""

    __slots__ = ("chart", "grade", "coeffs")
    kind = "?"

    def __init__(self, chart: Chart, grade: int, coeffs: Mapping[tuple, Expr] | None = None):
        if grade < 0:
            raise ValueError("grade must be non-negative")
        n = chart.dim
        clean: dict[tuple[int, ...], Expr] = {}
        for idx, c in (coeffs or {}).items():
            idx = tuple(idx)
            if len(idx) != grade:
                raise ValueError(f"index {idx} does not have grade {grade}")
            if any(not 0 <= i < n for i in idx):
                raise IndexError(f"index {idx} out of range for dim {n}")
            if any(idx[k] >= idx[k + 1] for k in range(grade - 1)):
                raise ValueError(f"index {idx} is not strictly increasing")
            if not isinstance(c, Expr):
                c = scalar.const(c)
            if c is not ZERO:
                clean[idx] = c
        self.chart = chart
        self.grade = grade
        self.coeffs = clean

    @classmethod
    def from_unsorted(cls, chart: Chart, grade: int, terms: Iterable[tuple[Iterable[int], Expr]]):
        """Accumulate terms whose index sequences may be unsorted or repeat."""
        acc: dict[tuple[int, ...], Expr] = {}
        for idx, c in terms:
            sign, key = sort_sign(idx)
            if sign == 0 or c is ZERO:
                continue
            c = _scaled(sign, c)
            acc[key] = acc[key] + c if key in acc else c
        return cls(chart, grade, acc)

    @classmethod
    def zero(cls, chart: Chart, grade: int):
        return cls(chart, grade, {})

    @classmethod
    def scalar(cls, chart: Chart, f) -> "_Alternating":
        return cls(chart, 0, {(): f})

    @classmethod
    def basis(cls, chart: Chart, *indices: int):
        sign, key = sort_sign(indices)
        if sign == 0:
            return cls.zero(chart, len(indices))
        return cls(chart, len(indices), {key: scalar.const(sign)})

    @property
    def dim(self) -> int:
        return self.chart.dim

    def coeff(self, idx: tuple[int, ...] = ()) -> Expr:
        return self.coeffs.get(tuple(idx), ZERO)

    def coeff_unsorted(self, idx: Iterable[int]) -> Expr:
        sign, key = sort_sign(idx)
        if sign == 0:
            return ZERO
        return _scaled(sign, self.coeff(key))

    def as_scalar(self) -> Expr:
        if self.grade != 0:
            raise ValueError(f"grade-{self.grade} tensor is not a scalar")
        return self.coeff(())

    def map(self, fn) -> "_Alternating":
        return type(self)(self.chart, self.grade, {k: fn(v) for k, v in self.coeffs.items()})

    def _check(self, other) -> None:
        if type(other) is not type(self):
            raise TypeError(f"cannot combine {self.kind} with {getattr(other, 'kind', other)}")
        if other.chart != self.chart:
            raise ValueError("chart mismatch")

    def __add__(self, other):
        self._check(other)
        if other.grade != self.grade:
            if not other.coeffs:
                return self
            if not self.coeffs:
                return other
            raise ValueError(f"grade mismatch: {self.grade} vs {other.grade}")
        acc = dict(self.coeffs)
        for k, v in other.coeffs.items():
            acc[k] = acc[k] + v if k in acc else v
        return type(self)(self.chart, self.grade, acc)

    def __neg__(self):
        return self.map(lambda c: -c)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, f):
        """Multiply by a scalar function or number."""
        f = scalar._lift(f)
        return self.map(lambda c: f * c)

    __rmul__ = __mul__

    def wedge(self, other):
        return wedge(self, other)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(grade={self.grade}, {tensor_text(self)})"

    def text(self) -> str:
        return tensor_text(self)


class MultiVector(_Alternating):
    """Sum over I of A_I e_{i1}^...^e_{ia}, with e_i the coordinate vector fields."""

    __slots__ = ()
    kind = "multivector"
    symbol = "e"


class Form(_Alternating):
    """Sum over I of eta_I dx^{i1}^...^dx^{ik}."""

    __slots__ = ()
    kind = "form"
    symbol = "dx"

    @classmethod
    def exact(cls, chart: Chart, f: Expr) -> "Form":
        """The 1-form df."""
        return cls(chart, 1, {(i,): partial(f, i) for i in range(chart.dim)})


def _pointwise(A: _Alternating, B: _Alternating) -> None:
    if A.chart != B.chart:
        raise ValueError("chart mismatch")


def wedge(A: _Alternating, B: _Alternating):
    """Exterior product of two multivectors or two forms."""
    A._check(B)
    g = A.grade + B.grade
    if g > A.dim:
        return type(A).zero(A.chart, g)
    terms = []
    for I, a in A.coeffs.items():
        for J, b in B.coeffs.items():
            terms.append((I + J, a * b))
    return type(A).from_unsorted(A.chart, g, terms)


def pairing(eta: Form, A: MultiVector) -> Expr:
    """<eta, A> with <dx^I, e_J> = delta_{IJ}."""
    if not isinstance(eta, Form) or not isinstance(A, MultiVector):
        raise TypeError("pairing takes (Form, MultiVector)")
    _pointwise(eta, A)
    if eta.grade != A.grade:
        raise ValueError(f"grade mismatch in pairing: {eta.grade} vs {A.grade}")
    return scalar.total(c * A.coeffs[I] for I, c in eta.coeffs.items() if I in A.coeffs)


def _complement(K: tuple[int, ...], J: tuple[int, ...]) -> tuple[int, ...] | None:
    sJ = set(J)
    if not sJ.issubset(K):
        return None
    return tuple(k for k in K if k not in sJ)


def interior_by_vector(A: MultiVector, eta: Form) -> Form:
    """i(A)eta, defined by <i(A)eta, B> = <eta, A ^ B>."""
    if not isinstance(A, MultiVector) or not isinstance(eta, Form):
        raise TypeError("interior_by_vector takes (MultiVector, Form)")
    _pointwise(A, eta)
    g = eta.grade - A.grade
    if g < 0:
        return Form.zero(eta.chart, 0)
    terms = []
    for J, a in A.coeffs.items():
        for K, c in eta.coeffs.items():
            L = _complement(K, J)
            if L is None:
                continue
            sign, _ = sort_sign(J + L)
            terms.append((L, _scaled(sign, a * c)))
    return Form.from_unsorted(eta.chart, g, terms)


def interior_by_form(eta: Form, A: MultiVector) -> MultiVector:
    """i(eta)A, defined by <tau, i(eta)A> = <tau ^ eta, A>."""
    if not isinstance(A, MultiVector) or not isinstance(eta, Form):
        raise TypeError("interior_by_form takes (Form, MultiVector)")
    _pointwise(A, eta)
    g = A.grade - eta.grade
    if g < 0:
        return MultiVector.zero(A.chart, 0)
    terms = []
    for J, c in eta.coeffs.items():
        for K, a in A.coeffs.items():
            L = _complement(K, J)
            if L is None:
                continue
            sign, _ = sort_sign(L + J)
            terms.append((L, _scaled(sign, a * c)))
    return MultiVector.from_unsorted(A.chart, g, terms)


def exterior_derivative(eta: Form) -> Form:
    """d(f dx^I) = sum_i (d_i f) dx^i ^ dx^I."""
    g = eta.grade + 1
    if g > eta.dim:
        return Form.zero(eta.chart, g)
    terms = []
    for I, c in eta.coeffs.items():
        for i in range(eta.dim):
            if i in I:
                continue
            d = partial(c, i)
            if d is not ZERO:
                terms.append(((i,) + I, d))
    return Form.from_unsorted(eta.chart, g, terms)


def lie_derivative_by_bivector(W: MultiVector, eta: Form) -> Form:
    """Generalized Lie derivative i(W) d eta - d i(W) eta."""
    first = interior_by_vector(W, exterior_derivative(eta))
    second = exterior_derivative(interior_by_vector(W, eta))
    g = eta.grade - W.grade + 1
    return _regrade(first, g) - _regrade(second, g)


def _regrade(T, grade: int):
    # interior products by too-large tensors come back as grade-0 zeros
    if T.grade == grade or grade < 0:
        return T
    if T.coeffs:
        raise ValueError("nonzero tensor of unexpected grade")
    return type(T).zero(T.chart, grade)


def apply_vector(X: MultiVector, f: Expr) -> Expr:
    """Directional derivative X f of a function along a vector field."""
    if X.grade != 1:
        raise ValueError("apply_vector needs a vector field")
    return scalar.total(c * partial(f, I[0]) for I, c in X.coeffs.items())


def lie_derivative_form(X: MultiVector, eta: Form) -> Form:
    """Lie derivative of a form along a vector field (Cartan's formula)."""
    if X.grade != 1:
        raise ValueError("lie_derivative_form needs a vector field")
    a = interior_by_vector(X, exterior_derivative(eta))
    if eta.grade == 0:
        return _regrade(a, 0)
    b = exterior_derivative(interior_by_vector(X, eta))
    return a + b


# ---------------------------------------------------------------- equality


def _aligned(tensors) -> list[list[Expr]]:
    keys = sorted({k for T in tensors for k in T.coeffs})
    return [[T.coeff(k) for k in keys] for T in tensors]


def tensors_agree(
    A: _Alternating, B: _Alternating, trials: int = scalar.DEFAULT_TRIALS, seed: int = 0
) -> bool:
    """Probabilistic coefficientwise equality (grades must match unless one side is 0)."""
    A._check(B)
    if A.grade != B.grade and A.coeffs and B.coeffs:
        return False
    lhs, rhs = _aligned([A, B])
    return scalar.agree(lhs, rhs, trials, seed, dim=A.dim)


def is_zero(A: _Alternating, trials: int = scalar.DEFAULT_TRIALS, seed: int = 0) -> bool:
    vals = list(A.coeffs.values())
    return scalar.agree(vals, [ZERO] * len(vals), trials, seed, dim=A.dim)


# ---------------------------------------------------------------- text syntax


class _TensorParser(scalar.ExprParser):
    """tensor := ['+'|'-'] term (('+'|'-') term)*, term := factor (('*'|'/') factor)*

    where exactly zero or one factor of each term is a basis symbol
    ``e[i,...]`` or ``dx[i,...]`` (1-based indices), never in a denominator.
    """

    def tensor(self):
        terms = []
        sign = 1
        if self.at_op("+", "-"):
            sign = -1 if self.next()[1] == "-" else 1
        terms.append(self.tterm(sign))
        while self.at_op("+", "-"):
            sign = -1 if self.next()[1] == "-" else 1
            terms.append(self.tterm(sign))
        self.expect_end()
        return terms

    def tfactor(self):
        kind, value, pos = self.peek()
        if kind == "ident" and value in ("e", "dx") and self.peek(1)[1] == "[":
            self.next()
            self.expect_op("[")
            idx = []
            if not self.at_op("]"):
                idx.append(self._index())
                while self.at_op(","):
                    self.next()
                    idx.append(self._index())
            self.expect_op("]")
            return (value, idx, pos)
        return self.factor()

    def _index(self) -> int:
        kind, value, pos = self.next()
        if kind != "int":
            raise ParseError("basis index must be a positive integer", pos)
        i = int(value)
        if not 1 <= i <= self.chart.dim:
            raise ParseError(f"basis index {i} out of range 1..{self.chart.dim}", pos)
        return i - 1

    def tterm(self, sign: int):
        coeff: Expr = scalar.const(sign)
        basis = None
        first = True
        op = "*"
        while True:
            pos = self.peek()[2]
            f = self.tfactor()
            if isinstance(f, tuple):
                if basis is not None:
                    raise ParseError("more than one basis symbol in a term", pos)
                if op == "/":
                    raise ParseError("basis symbol cannot be a divisor", pos)
                basis = f
            elif op == "*" or first:
                coeff = coeff * f
            else:
                if f is ZERO:
                    raise ParseError("division by literal zero", pos)
                coeff = coeff / f
            first = False
            if self.at_op("*", "/"):
                op = self.next()[1]
            else:
                break
        return coeff, basis


def parse_tensor(text: str, chart: Chart, kind: str | None = None, grade: int | None = None):
    """Parse the tensor text syntax.

    ``kind`` is ``"multivector"``, ``"form"`` or None (inferred; bare
    scalars default to ``"multivector"``).  ``grade`` is required to type a
    zero tensor and otherwise checked.
    """
    terms = _TensorParser(text, chart).tensor()
    kinds = {b[0] for _, b in terms if b is not None}
    if len(kinds) > 1:
        raise ParseError("mixed e[...] and dx[...] terms")
    found = "multivector" if kinds == {"e"} else "form" if kinds == {"dx"} else None
    if kind is not None and found is not None and kind != found:
        raise ParseError(f"expected a {kind}, got a {found}")
    kind = kind or found or "multivector"
    cls = MultiVector if kind == "multivector" else Form
    grades = {len(b[1]) if b is not None else 0 for c, b in terms if c is not ZERO}
    if len(grades) > 1:
        raise ParseError(f"terms of different grades {sorted(grades)}")
    g = grades.pop() if grades else (grade if grade is not None else 0)
    if grade is not None and g != grade:
        # all-zero input takes the requested grade
        if any(c is not ZERO for c, _ in terms):
            raise ParseError(f"expected grade {grade}, got grade {g}")
        g = grade
    out = cls.from_unsorted(
        chart, g, [((b[1] if b is not None else ()), c) for c, b in terms if c is not ZERO]
    )
    return out


def tensor_text(T: _Alternating) -> str:
    """Print a tensor in the text syntax (sorted indices, 1-based)."""
    if T.grade == 0:
        return scalar.to_text(T.coeff(()), T.chart)
    if not T.coeffs:
        return "0"
    parts = []
    for I in sorted(T.coeffs):
        c = T.coeffs[I]
        idx = ",".join(str(i + 1) for i in I)
        basis = f"{T.symbol}[{idx}]"
        if c is ONE:
            parts.append(basis)
        else:
            text = scalar.to_text(c, T.chart)
            if c.kind in (scalar.ADD, scalar.SUB, scalar.DIV, scalar.NEG):
                text = f"({text})"
            parts.append(f"{text}*{basis}")
    return " + ".join(parts)


def basis_multivectors(chart: Chart, grade: int):
    for I in combinations(range(chart.dim), grade):
        yield I, MultiVector(chart, grade, {I: ONE})


def basis_forms(chart: Chart, grade: int):
    for I in combinations(range(chart.dim), grade):
        yield I, Form(chart, grade, {I: ONE})

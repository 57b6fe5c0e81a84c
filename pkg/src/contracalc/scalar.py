"""Exact scalar fields over a coordinate chart.

Scalars are expression DAGs with exact rational constants.  Nodes are
hash-consed, so structurally identical subtrees are the same object; this
keeps symbolic derivatives and memoized evaluation cheap.  Equality of two
expressions is decided by exact evaluation at pseudorandom rational points
(Schwartz-Zippel style) instead of by normalization.

Coordinate indices are 0-based internally; the text grammar uses names.
"""

from __future__ import annotations

import random
import re
import threading
import weakref
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import gmpy2

__all__ = [
    "Chart",
    "Expr",
    "ParseError",
    "SamplingError",
    "DEFAULT_TRIALS",
    "const",
    "coord",
    "ZERO",
    "ONE",
    "parse_expr",
    "to_text",
    "evaluate",
    "evaluate_many",
    "partial",
    "sample_points",
    "agree",
    "equal_probabilistic",
    "is_identically_zero",
    "det",
]

DEFAULT_TRIALS = 8
# Coordinates of sample points are n/d with n in NUM_RANGE, d in DEN_RANGE.
NUM_RANGE = (-100, 100)
DEN_RANGE = (1, 20)
MAX_RETRIES = 64

CONST, COORD, NEG, ADD, SUB, MUL, DIV, POW = range(8)
_KIND_NAMES = ("Const", "Coord", "Neg", "Add", "Sub", "Mul", "Div", "IntPow")


class ParseError(ValueError):
    """Raised for malformed expression or tensor text."""

    def __init__(self, message: str, position: int | None = None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


class SamplingError(RuntimeError):
    """No admissible evaluation point found within the retry budget."""


_intern_lock = threading.Lock()
_intern: "weakref.WeakValueDictionary[tuple, Expr]" = weakref.WeakValueDictionary()


class Expr:
    """A node of a scalar expression DAG.

    Use the module constructors (``const``, ``coord``) and the arithmetic
    operators; never instantiate directly.  Two expressions compare equal
    with ``==`` iff they are the same tree.
    """

    __slots__ = ("kind", "value", "args", "_partials", "__weakref__")

    kind: int
    value: object
    args: tuple

    def __repr__(self) -> str:
        if self.kind == CONST:
            return f"Const({self.value})"
        if self.kind == COORD:
            return f"Coord({self.value})"
        if self.kind == POW:
            return f"IntPow({self.args[0]!r}, {self.value})"
        inner = ", ".join(repr(a) for a in self.args)
        return f"{_KIND_NAMES[self.kind]}({inner})"

    # identity semantics: the intern table guarantees structure == identity
    def __hash__(self) -> int:
        return id(self)

    def __eq__(self, other) -> bool:
        return self is other

    def __add__(self, other):
        return add(self, _lift(other))

    def __radd__(self, other):
        return add(_lift(other), self)

    def __sub__(self, other):
        return sub(self, _lift(other))

    def __rsub__(self, other):
        return sub(_lift(other), self)

    def __mul__(self, other):
        return mul(self, _lift(other))

    def __rmul__(self, other):
        return mul(_lift(other), self)

    def __truediv__(self, other):
        return div(self, _lift(other))

    def __rtruediv__(self, other):
        return div(_lift(other), self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, k: int):
        return power(self, k)

    @property
    def is_zero(self) -> bool:
        """Structural zero (the constant 0), not identical vanishing."""
        return self is ZERO

    @property
    def is_const(self) -> bool:
        return self.kind == CONST


def _make(kind: int, value, args: tuple) -> Expr:
    key = (kind, value, tuple(id(a) for a in args))
    with _intern_lock:
        node = _intern.get(key)
        if node is None:
            node = object.__new__(Expr)
            node.kind = kind
            node.value = value
            node.args = args
            node._partials = {}
            _intern[key] = node
        return node


def _lift(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, Fraction)):
        return const(x)
    raise TypeError(f"cannot use {type(x).__name__} as a scalar expression")


def const(value) -> Expr:
    value = Fraction(value)
    # key on (num, den) so 1 and Fraction(1) intern together
    return _make(CONST, value, ())


def coord(index: int) -> Expr:
    if index < 0:
        raise ValueError("coordinate index must be non-negative")
    return _make(COORD, index, ())


ZERO = const(0)
ONE = const(1)
MINUS_ONE = const(-1)


def neg(a: Expr) -> Expr:
    if a.kind == CONST:
        return const(-a.value)
    if a.kind == NEG:
        return a.args[0]
    if a.kind == SUB:
        return sub(a.args[1], a.args[0])
    return _make(NEG, None, (a,))


def add(a: Expr, b: Expr) -> Expr:
    if a.kind == CONST and b.kind == CONST:
        return const(a.value + b.value)
    if a is ZERO:
        return b
    if b is ZERO:
        return a
    if b.kind == NEG:
        return sub(a, b.args[0])
    if a.kind == NEG:
        return sub(b, a.args[0])
    return _make(ADD, None, (a, b))


def sub(a: Expr, b: Expr) -> Expr:
    if a.kind == CONST and b.kind == CONST:
        return const(a.value - b.value)
    if b is ZERO:
        return a
    if a is ZERO:
        return neg(b)
    if b.kind == NEG:
        return add(a, b.args[0])
    return _make(SUB, None, (a, b))


def mul(a: Expr, b: Expr) -> Expr:
    if a.kind == CONST and b.kind == CONST:
        return const(a.value * b.value)
    if a is ZERO or b is ZERO:
        return ZERO
    if a is ONE:
        return b
    if b is ONE:
        return a
    if a is MINUS_ONE:
        return neg(b)
    if b is MINUS_ONE:
        return neg(a)
    if a.kind == NEG:
        return neg(mul(a.args[0], b))
    if b.kind == NEG:
        return neg(mul(a, b.args[0]))
    return _make(MUL, None, (a, b))


def div(a: Expr, b: Expr) -> Expr:
    if b is ZERO:
        raise ZeroDivisionError("division by the constant 0")
    if a.kind == CONST and b.kind == CONST:
        return const(a.value / b.value)
    if a is ZERO:
        return ZERO
    if b is ONE:
        return a
    if a.kind == NEG:
        return neg(div(a.args[0], b))
    if b.kind == NEG:
        return neg(div(a, b.args[0]))
    return _make(DIV, None, (a, b))


def power(a: Expr, k: int) -> Expr:
    if not isinstance(k, int) or k < 0:
        raise ValueError("only non-negative integer exponents are supported")
    if k == 0:
        return ONE
    if k == 1:
        return a
    if a.kind == CONST:
        return const(a.value**k)
    return _make(POW, k, (a,))


def total(terms: Iterable[Expr]) -> Expr:
    """Sum of expressions (left fold through ``add``)."""
    acc = ZERO
    for t in terms:
        acc = add(acc, t)
    return acc


def _postorder(roots: Iterable[Expr]) -> list[Expr]:
    """Nodes reachable from ``roots``, children before parents, each once."""
    seen: set[int] = set()
    order: list[Expr] = []
    for root in roots:
        if id(root) in seen:
            continue
        stack = [(root, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for child in node.args:
                if id(child) not in seen:
                    stack.append((child, False))
    return order


def max_coord(exprs: Iterable[Expr]) -> int:
    """Largest coordinate index occurring in ``exprs`` (-1 if none)."""
    return max((n.value for n in _postorder(exprs) if n.kind == COORD), default=-1)


# ---------------------------------------------------------------- charts


_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


@dataclass(frozen=True)
class Chart:
    """A single coordinate chart U with named coordinates x_1..x_n."""

    coord_names: tuple[str, ...]

    def __post_init__(self):
        names = tuple(self.coord_names)
        object.__setattr__(self, "coord_names", names)
        if not names:
            raise ValueError("a chart needs at least one coordinate")
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate coordinate names in {names}")
        for name in names:
            if not _IDENT.match(name) or name in ("e", "dx"):
                raise ValueError(f"invalid coordinate name {name!r}")

    @classmethod
    def standard(cls, dim: int, prefix: str = "x") -> "Chart":
        if dim == 2 and prefix == "x":
            return cls(("x", "y"))
        if dim == 3 and prefix == "x":
            return cls(("x", "y", "z"))
        return cls(tuple(f"{prefix}{i + 1}" for i in range(dim)))

    @property
    def dim(self) -> int:
        return len(self.coord_names)

    def coord(self, i: int) -> Expr:
        if not 0 <= i < self.dim:
            raise IndexError(f"coordinate index {i} out of range for dim {self.dim}")
        return coord(i)

    def coords(self) -> tuple[Expr, ...]:
        return tuple(coord(i) for i in range(self.dim))

    def parse(self, text: str) -> Expr:
        return parse_expr(text, self)

    def text(self, e: Expr) -> str:
        return to_text(e, self)


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<int>\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^()\[\],]))"
)


def tokenize(text: str) -> list[tuple[str, str, int]]:
    """Split text into (kind, value, position) tokens; kind in int/ident/op."""
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", n))
    return tokens


class ExprParser:
    """Recursive-descent parser for the scalar expression grammar.

    On top of it, ``contracalc.tensor`` parses the tensor text syntax by
    reusing ``factor``.
    """

    def __init__(self, text: str, chart: Chart):
        self.tokens = tokenize(text)
        self.i = 0
        self.chart = chart
        self._names = {name: k for k, name in enumerate(chart.coord_names)}

    def peek(self, offset: int = 0):
        return self.tokens[min(self.i + offset, len(self.tokens) - 1)]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def at_op(self, *ops: str) -> bool:
        kind, value, _ = self.peek()
        return kind == "op" and value in ops

    def expect_op(self, op: str):
        kind, value, pos = self.next()
        if kind != "op" or value != op:
            raise ParseError(f"expected {op!r}, found {value or 'end of input'!r}", pos)

    def expect_end(self):
        kind, value, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {value!r}", pos)

    def expr(self) -> Expr:
        acc = self.term()
        while self.at_op("+", "-"):
            op = self.next()[1]
            rhs = self.term()
            acc = add(acc, rhs) if op == "+" else sub(acc, rhs)
        return acc

    def term(self) -> Expr:
        acc = self.factor()
        while self.at_op("*", "/"):
            op = self.next()[1]
            pos = self.peek()[2]
            rhs = self.factor()
            if op == "*":
                acc = mul(acc, rhs)
            else:
                if rhs is ZERO:
                    raise ParseError("division by literal zero", pos)
                acc = div(acc, rhs)
        return acc

    def factor(self) -> Expr:
        b = self.base()
        if self.at_op("^"):
            self.next()
            kind, value, pos = self.next()
            if kind != "int":
                raise ParseError("exponent must be a non-negative integer", pos)
            b = power(b, int(value))
        return b

    def base(self) -> Expr:
        kind, value, pos = self.peek()
        if kind == "int":
            self.next()
            num = int(value)
            # greedy rational literal p/q
            if self.at_op("/") and self.peek(1)[0] == "int":
                self.next()
                _, den, dpos = self.next()
                if int(den) == 0:
                    raise ParseError("zero denominator in rational literal", dpos)
                return const(Fraction(num, int(den)))
            return const(num)
        if kind == "ident":
            self.next()
            if value not in self._names:
                raise ParseError(f"unknown identifier {value!r}", pos)
            return coord(self._names[value])
        if kind == "op" and value == "(":
            self.next()
            inner = self.expr()
            self.expect_op(")")
            return inner
        if kind == "op" and value == "-":
            self.next()
            return neg(self.factor())
        raise ParseError(f"unexpected {value or 'end of input'!r}", pos)


def parse_expr(text: str, chart: Chart) -> Expr:
    """Parse ``text`` against the coordinate names of ``chart``.

    >>> c = Chart(("x", "y"))
    >>> parse_expr("x^2*y + 1/2", c)
    Add(Mul(IntPow(Coord(0), 2), Coord(1)), Const(1/2))
    """
    p = ExprParser(text, chart)
    e = p.expr()
    p.expect_end()
    return e


# precedence levels for printing
_SUM, _PROD, _FACTOR, _ATOM = range(4)


def _const_text(v: Fraction) -> tuple[str, int]:
    if v.denominator == 1 and v >= 0:
        return str(v.numerator), _ATOM
    return f"({v})", _ATOM


def to_text(e: Expr, chart: Chart) -> str:
    """Print ``e`` in the expression grammar; ``parse_expr`` inverts it exactly."""
    names = chart.coord_names
    memo: dict[int, tuple[str, int]] = {}

    def wrap(child: Expr, level: int) -> str:
        s, lv = memo[id(child)]
        return s if lv >= level else f"({s})"

    for node in _postorder([e]):
        k = node.kind
        if k == CONST:
            out = _const_text(node.value)
        elif k == COORD:
            out = (names[node.value], _ATOM)
        elif k == NEG:
            out = ("-" + wrap(node.args[0], _FACTOR), _FACTOR)
        elif k in (ADD, SUB):
            op = " + " if k == ADD else " - "
            out = (wrap(node.args[0], _SUM) + op + wrap(node.args[1], _PROD), _SUM)
        elif k in (MUL, DIV):
            op = "*" if k == MUL else "/"
            out = (wrap(node.args[0], _PROD) + op + wrap(node.args[1], _FACTOR), _PROD)
        else:
            out = (f"{wrap(node.args[0], _ATOM)}^{node.value}", _FACTOR)
        memo[id(node)] = out
    return memo[id(e)][0]


# ---------------------------------------------------------------- evaluation


def _mpq(v: Fraction):
    return gmpy2.mpq(v.numerator, v.denominator)


def _eval_into(order: list[Expr], point: Sequence, memo: dict) -> None:
    for node in order:
        key = id(node)
        if key in memo:
            continue
        k = node.kind
        if k == CONST:
            val = _mpq(node.value)
        elif k == COORD:
            val = point[node.value]
        elif k == NEG:
            val = -memo[id(node.args[0])]
        elif k == ADD:
            val = memo[id(node.args[0])] + memo[id(node.args[1])]
        elif k == SUB:
            val = memo[id(node.args[0])] - memo[id(node.args[1])]
        elif k == MUL:
            val = memo[id(node.args[0])] * memo[id(node.args[1])]
        elif k == DIV:
            d = memo[id(node.args[1])]
            if d == 0:
                raise ZeroDivisionError("denominator vanishes at evaluation point")
            val = memo[id(node.args[0])] / d
        else:
            val = memo[id(node.args[0])] ** node.value
        memo[key] = val


def _to_point(p: Sequence) -> tuple:
    return tuple(x if type(x) is type(gmpy2.mpq()) else _mpq(Fraction(x)) for x in p)


def evaluate_many(exprs: Sequence[Expr], point: Sequence) -> list[Fraction]:
    """Exact values of several expressions at one point, sharing subterms.

    Raises ZeroDivisionError if any denominator vanishes at ``point``.
    """
    pt = _to_point(point)
    need = max_coord(exprs)
    if need >= len(pt):
        raise ValueError(f"point has {len(pt)} coordinates, expression needs {need + 1}")
    memo: dict = {}
    _eval_into(_postorder(exprs), pt, memo)
    return [Fraction(int(v.numerator), int(v.denominator)) for v in (memo[id(e)] for e in exprs)]


def evaluate(e: Expr, point: Sequence) -> Fraction:
    """Exact rational value of ``e`` at ``point``.

    >>> evaluate(coord(0) * coord(1), (2, Fraction(3, 2)))
    Fraction(3, 1)
    """
    return evaluate_many([e], point)[0]


# ---------------------------------------------------------------- derivatives


def partial(e: Expr, i: int) -> Expr:
    """Symbolic derivative of ``e`` with respect to coordinate ``i``."""
    for node in _postorder([e]):
        cache = node._partials
        if i in cache:
            continue
        k = node.kind
        if k == CONST:
            d = ZERO
        elif k == COORD:
            d = ONE if node.value == i else ZERO
        elif k == NEG:
            d = neg(node.args[0]._partials[i])
        elif k == ADD:
            d = add(node.args[0]._partials[i], node.args[1]._partials[i])
        elif k == SUB:
            d = sub(node.args[0]._partials[i], node.args[1]._partials[i])
        elif k == MUL:
            a, b = node.args
            d = add(mul(a._partials[i], b), mul(a, b._partials[i]))
        elif k == DIV:
            a, b = node.args
            da, db = a._partials[i], b._partials[i]
            if db is ZERO:
                d = div(da, b)
            else:
                d = div(sub(mul(da, b), mul(a, db)), power(b, 2))
        else:
            a = node.args[0]
            da = a._partials[i]
            d = mul(mul(const(node.value), power(a, node.value - 1)), da)
        cache[i] = d
    return e._partials[i]


# ---------------------------------------------------------------- identity testing


def sample_points(dim: int, seed: int):
    """Endless deterministic stream of sample points for a given seed."""
    rng = random.Random(seed)
    lo, hi = NUM_RANGE
    dlo, dhi = DEN_RANGE
    while True:
        yield tuple(
            gmpy2.mpq(rng.randint(lo, hi), rng.randint(dlo, dhi)) for _ in range(dim)
        )


def agree(
    lhs: Sequence[Expr],
    rhs: Sequence[Expr],
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
    dim: int | None = None,
) -> bool:
    """True iff ``lhs[k] == rhs[k]`` at ``trials`` random admissible points.

    A point is admissible when every expression involved evaluates without
    a vanishing denominator; inadmissible points are redrawn, at most
    MAX_RETRIES times in total before SamplingError.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if len(lhs) != len(rhs):
        raise ValueError("lhs and rhs must have equal length")
    exprs = list(lhs) + list(rhs)
    if not exprs:
        return True
    if all(a is b for a, b in zip(lhs, rhs)):
        return True
    need = max_coord(exprs) + 1
    dim = max(dim or 0, need, 1)
    order = _postorder(exprs)
    m = len(lhs)
    retries = 0
    accepted = 0
    for point in sample_points(dim, seed):
        memo: dict = {}
        try:
            _eval_into(order, point, memo)
        except ZeroDivisionError:
            retries += 1
            if retries > MAX_RETRIES:
                raise SamplingError(
                    "no admissible sample point found; a denominator seems to "
                    "vanish on a large set"
                ) from None
            continue
        for k in range(m):
            if memo[id(exprs[k])] != memo[id(exprs[m + k])]:
                return False
        accepted += 1
        if accepted >= trials:
            return True
    raise AssertionError("unreachable")


def equal_probabilistic(
    e1: Expr, e2: Expr, trials: int = DEFAULT_TRIALS, seed: int = 0
) -> bool:
    """Probabilistic exact equality of two scalar expressions."""
    return agree([e1], [e2], trials, seed)


def is_identically_zero(e: Expr, trials: int = DEFAULT_TRIALS, seed: int = 0) -> bool:
    return agree([e], [ZERO], trials, seed)


def det(matrix: Sequence[Sequence[Expr]]) -> Expr:
    """Determinant by cofactor expansion along the first row (small sizes)."""
    k = len(matrix)
    if k == 0:
        return ONE
    if k == 1:
        return matrix[0][0]
    if k == 2:
        return sub(mul(matrix[0][0], matrix[1][1]), mul(matrix[0][1], matrix[1][0]))
    acc = ZERO
    for col in range(k):
        entry = matrix[0][col]
        if entry is ZERO:
            continue
        minor = [row[:col] + row[col + 1 :] for row in matrix[1:]]
        term = mul(entry, det(minor))
        acc = add(acc, term) if col % 2 == 0 else sub(acc, term)
    return acc

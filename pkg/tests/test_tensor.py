import pytest
from hypothesis import given

from contracalc import randgen as rg
from contracalc import scalar
from contracalc.scalar import Chart, ParseError, parse_expr
from contracalc.tensor import (
    Form, MultiVector,
    exterior_derivative, interior_by_form, interior_by_vector, is_zero,
    lie_derivative_by_bivector, pairing, parse_tensor, tensor_text, tensors_agree, wedge,
)

from conftest import rng_of, seeds

R2 = Chart(("x", "y"))
R3 = Chart(("x", "y", "z"))


def T(text, chart=R2, **kw):
    return parse_tensor(text, chart, **kw)


def same(A, B):
    return tensors_agree(A, B)


def test_wedge_examples():
    assert same(wedge(T("dx[1]"), T("dx[2]")), T("dx[1,2]"))
    assert same(wedge(T("x*dx[2]"), T("dx[1]")), T("-x*dx[1,2]"))
    assert not wedge(T("dx[1]"), T("dx[1]")).coeffs


def test_pairing_examples():
    assert pairing(T("dx[1,2]"), T("e[1,2]")) is scalar.ONE
    assert pairing(T("dx[1,2]"), T("e[2,1]")).value == -1
    eta = wedge(T("dx[1] + dx[2]"), T("dx[2]"))
    assert pairing(eta, T("e[1,2]")).value == 1


def test_interior_by_vector_examples():
    mu = T("dx[1,2]")
    assert same(interior_by_vector(T("e[1]"), mu), T("dx[2]"))
    assert interior_by_vector(T("e[1,2]"), mu).as_scalar() is scalar.ONE
    assert same(interior_by_vector(T("e[2]"), mu), T("-dx[1]"))


def test_interior_by_form_examples():
    A = T("e[1,2]")
    assert same(interior_by_form(T("dx[1]"), A), T("-e[2]"))
    assert interior_by_form(T("dx[1,2]"), A).as_scalar() is scalar.ONE


def test_exterior_derivative_examples():
    assert same(exterior_derivative(T("x*dx[2]")), T("dx[1,2]"))
    assert same(exterior_derivative(T("y*dx[1]")), T("-dx[1,2]"))


def test_lie_derivative_by_constant_bivector():
    out = lie_derivative_by_bivector(T("e[1,2]"), T("dx[1,2]"))
    assert is_zero(out)


def test_text_syntax():
    A = T("x*e[2,1] + y^2*e[1,2]")
    assert tensor_text(A) == "(y^2 - x)*e[1,2]"
    assert tensor_text(T("(-1)*dx[1,2,3]", R3)) == "(-1)*dx[1,2,3]"
    assert tensor_text(T("x*e[1]")) == "x*e[1]"
    assert tensor_text(T("0", grade=2)) == "0"
    with pytest.raises(ParseError):
        T("e[1] + dx[2]")
    with pytest.raises(ParseError):
        T("e[1] + e[1,2]")
    with pytest.raises(ParseError):
        T("x/e[1]")
    with pytest.raises(ParseError):
        T("e[3]")


def test_repeated_index_is_zero():
    assert not T("e[1,1]").coeffs
    assert T("e[1,1]").grade == 2


@given(seeds)
def test_interior_product_rule(seed):
    # i(alpha)(X ^ A) = X ^ i(alpha)A + (-1)^a alpha(X) A
    rng = rng_of(seed)
    al = rg.form(rng, R3, 1)
    X = rg.multivector(rng, R3, 1)
    A = rg.multivector(rng, R3, 2)
    lhs = interior_by_form(al, wedge(X, A))
    rhs = wedge(X, interior_by_form(al, A)) + A * pairing(al, X)
    assert same(lhs, rhs)


@given(seeds)
def test_d_squared_on_functions(seed):
    f = rg.polynomial(rng_of(seed), R3)
    assert is_zero(exterior_derivative(exterior_derivative(Form.scalar(R3, f))))


@given(seeds)
def test_wedge_graded_commutative(seed):
    rng = rng_of(seed)
    a, b = rng.randint(0, 3), rng.randint(0, 3)
    A, B = rg.form(rng, R3, a), rg.form(rng, R3, b)
    sign = -1 if (a * b) % 2 else 1
    if a + b <= 3:
        assert same(wedge(A, B), wedge(B, A) * sign)


@given(seeds)
def test_interior_is_adjoint_of_wedge(seed):
    # <beta, i(alpha)A> = <beta ^ alpha, A>
    rng = rng_of(seed)
    k = rng.randint(1, 3)
    j = rng.randint(0, 3 - k)
    al, be = rg.form(rng, R3, k), rg.form(rng, R3, j)
    A = rg.multivector(rng, R3, j + k)
    assert scalar.equal_probabilistic(pairing(be, interior_by_form(al, A)), pairing(wedge(be, al), A))


@given(seeds)
def test_text_round_trip(seed):
    rng = rng_of(seed)
    g = rng.randint(0, 3)
    A = rg.multivector(rng, R3, g) if rng.random() < 0.5 else rg.form(rng, R3, g)
    back = parse_tensor(tensor_text(A), R3, kind=A.kind, grade=g)
    assert back.coeffs == A.coeffs


@given(seeds)
def test_d_leibniz(seed):
    rng = rng_of(seed)
    a = rng.randint(0, 2)
    A, B = rg.form(rng, R3, a), rg.form(rng, R3, 1)
    sign = -1 if a % 2 else 1
    lhs = exterior_derivative(wedge(A, B))
    rhs = wedge(exterior_derivative(A), B) + wedge(A, exterior_derivative(B)) * sign
    assert same(lhs, rhs)


def test_type_mixing_is_rejected():
    with pytest.raises(TypeError):
        T("e[1]") + T("dx[1]")
    with pytest.raises(ValueError):
        MultiVector(R2, 2, {(1, 0): 1})
    with pytest.raises(IndexError):
        Form(R2, 1, {(2,): 1})

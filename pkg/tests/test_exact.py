import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from mopcheck.errors import ExactArithmeticError, ShapeMismatchError, SingularMatrixError
from mopcheck.exact import (
    FIELD,
    X,
    CMat,
    MatRF,
    crat,
    degree,
    deriv,
    evaluate,
    mat_det,
    mat_inv,
    poly_coeffs,
    poly_gcd,
    poly_rem,
    ratfun_arith,
    rf,
    root_multiplicity,
)
from tests.conftest import gaussian, nonzero_gaussian, nonzero_polynomials, polynomials


def test_common_denominator():
    assert ratfun_arith(1 / (X - 1), 1 / (X + 1), "add") == 2 * X / (X**2 - 1)


def test_times_zero():
    assert ratfun_arith(X / (X + 3), 0, "mul") == FIELD.zero


def test_cancellation():
    f = ratfun_arith(X**2 - 1, X - 1, "div")
    assert f == X + 1
    assert f.denom == FIELD.ring.one


def test_division_by_zero():
    with pytest.raises(ExactArithmeticError):
        ratfun_arith(X, 0, "div")
    with pytest.raises(ZeroDivisionError):
        ratfun_arith(X, FIELD.zero, "div")


@pytest.mark.parametrize("a, b, expected", [
    (X**2 - 1, X - 1, X - 1),
    (X, 1, FIELD.one),
    ((X**2 + 1) ** 2, X**2 + 1, X**2 + 1),
    (3 * X - 6, 2 * X**2 - 8, X - 2),
])
def test_poly_gcd(a, b, expected):
    assert poly_gcd(a, b) == expected


def test_gcd_of_zeros():
    with pytest.raises(ExactArithmeticError):
        poly_gcd(0, 0)


def test_gaussian_coefficients():
    i = rf(crat(0, 1))
    f = (X - i) * (X + i)
    assert f == X**2 + 1
    assert poly_coeffs(X**2 * (1 + i)) == [crat(0), crat(0), crat(1, 1)]
    assert evaluate(X**2 + 1, crat(0, 1)) == crat(0)


def test_degrees_and_multiplicity():
    assert degree(FIELD.zero) == -1
    assert degree(rf(5)) == 0
    assert root_multiplicity(X**3 * (X - 1), 0) == 3
    assert root_multiplicity(X**2 * (1 - X) ** 2, 1) == 2


@pytest.mark.parametrize("m, expected", [
    (MatRF.of([[1, X], [0, 1]]), MatRF.of([[1, -X], [0, 1]])),
    (MatRF.identity(3), MatRF.identity(3)),
    (MatRF.of([[X, 0], [0, X]]), MatRF.of([[1 / X, 0], [0, 1 / X]])),
])
def test_mat_inv(m, expected):
    assert mat_inv(m) == expected


def test_singular_matrix():
    with pytest.raises(SingularMatrixError):
        mat_inv(MatRF.of([[1, X], [X, X**2]]))
    with pytest.raises(SingularMatrixError):
        CMat.of([[1, 2], [2, 4]]).inv()


def test_shapes():
    with pytest.raises(ShapeMismatchError):
        MatRF.of([[1, 2], [3]])
    with pytest.raises(ShapeMismatchError):
        MatRF.identity(2) * MatRF.identity(3)


def test_positive_definite():
    assert CMat.of([[2, 1], [1, 2]]).is_positive_definite()
    assert not CMat.of([[1, 2], [2, 1]]).is_positive_definite()
    assert not CMat.of([[1, 1], [0, 1]]).is_positive_definite()
    herm = CMat.of([[2, crat(0, 1)], [crat(0, -1), 2]])
    assert herm.is_hermitian() and herm.is_positive_definite()


@settings(max_examples=40, deadline=None)
@given(gaussian, gaussian, gaussian)
def test_gaussian_field_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    if a:
        assert a * (1 / a) == crat(1)


@settings(max_examples=25, deadline=None)
@given(polynomials, nonzero_polynomials, nonzero_polynomials)
def test_ratfun_field_axioms(p, q, s):
    f, g = p / q, q / s
    assert (f + g) * s == f * s + g * s
    assert ratfun_arith(ratfun_arith(f, g, "mul"), g, "div") == f
    assert ratfun_arith(f, f, "sub") == FIELD.zero


@settings(max_examples=25, deadline=None)
@given(nonzero_polynomials, nonzero_polynomials)
def test_gcd_divides_and_is_monic(p, q):
    g = poly_gcd(p, q)
    assert poly_coeffs(g)[-1] == crat(1)
    assert poly_rem(p, g) == FIELD.zero
    assert poly_rem(q, g) == FIELD.zero


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 3).flatmap(lambda n: st.lists(
    st.lists(polynomials, min_size=n, max_size=n), min_size=n, max_size=n)))
def test_inverse_times_matrix_is_identity(rows):
    m = MatRF.of(rows)
    assume(mat_det(m))
    assert mat_inv(m) * m == MatRF.identity(len(rows))


@settings(max_examples=20, deadline=None)
@given(nonzero_gaussian)
def test_conjugate_transpose(c):
    m = CMat.of([[c, 1], [0, c]])
    assert m.H.H == m
    assert (m * m).H == m.H * m.H


@pytest.mark.parametrize("f, expected", [
    (1 / (1 + X**2), -2 * X / (1 + X**2) ** 2),
    (X**3 + rf(crat(0, 1)) * X, 3 * X**2 + rf(crat(0, 1))),
    ((X - 1) / (X + 1), 2 / (X + 1) ** 2),
    (FIELD(5), FIELD.zero),
])
def test_deriv(f, expected):
    assert deriv(f) == expected

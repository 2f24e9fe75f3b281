from fractions import Fraction

import pytest

from mopcheck.catalog import build_weight, hermite_example
from mopcheck.errors import FiltrationError, ShapeMismatchError, WindowError
from mopcheck.exact import X, CMat, MatRF, crat
from mopcheck.fourier import (
    EigenvalueMatrix,
    FourierTest,
    ShiftOp,
    band_representation,
    bilinear_identity,
    build_L,
    dagger_compatibility,
    discrete_dagger,
    dw_membership,
    eigen_dagger_check,
    fourier_image,
    left_fourier_test,
    multiplicativity,
    operator_from_eigenvalue,
    positivity_witness,
)
from mopcheck.opalg import DiffOp
from mopcheck.weights import classical_kernel, monic_sequence


@pytest.fixture(scope="module")
def hermite_seq():
    return monic_sequence(build_weight("hermite"), 10)


@pytest.fixture(scope="module")
def example():
    ex = hermite_example(2)
    return ex, monic_sequence(ex.weight, 10)


def test_eigenvalue_interpolation():
    lam = EigenvalueMatrix.from_function(lambda n: CMat.of([[n * n, 1], [0, -n]]), 4)
    assert lam.degree == 2
    assert [c[0, 0] for c in lam.to_monomial()] == [crat(0), crat(0), crat(1)]
    assert lam.entry_degree(1, 1) == 1
    assert lam.entry_degree(1, 0) == -1
    assert lam.at(7) == CMat.of([[49, 1], [0, -7]])


def test_eigenvalue_products():
    a = EigenvalueMatrix.from_function(lambda n: CMat.of([[n + 1]]), 2)
    b = EigenvalueMatrix.from_function(lambda n: CMat.of([[n - 3]]), 2)
    assert (a * b).at(5) == CMat.of([[12]])
    assert (a - a).is_zero()


def test_classical_membership(hermite_seq):
    d = classical_kernel("hermite")[1]
    check = dw_membership(d, hermite_seq, 8)
    assert check.accepted and check.proof
    assert all(check.eigen.at(n) == CMat.of([[-2 * n]]) for n in range(9))


def test_rejects_a_bare_derivative(hermite_seq):
    check = dw_membership(DiffOp.dx(), hermite_seq, 6)
    assert not check.accepted
    assert check.witness == 1


def test_rejects_a_filtration_breaking_operator(hermite_seq):
    d = DiffOp.of([MatRF.zeros(1), MatRF.scalar(X**3, 1)], (1, 1))
    check = dw_membership(d, hermite_seq, 4)
    assert not check.accepted
    with pytest.raises(FiltrationError):
        fourier_image(d)


def test_window_beyond_the_sequence(hermite_seq):
    with pytest.raises(WindowError):
        dw_membership(DiffOp.identity(1), hermite_seq, 11)


def test_recurrence_operator(hermite_seq):
    l_op = build_L(hermite_seq)
    assert l_op.band == (-1, 1)
    assert l_op.at(-1, 3) == CMat.of([[Fraction(3, 2)]])
    assert l_op.at(0, 3).is_zero()


def test_band_and_left_fourier_test(hermite_seq):
    d = classical_kernel("hermite")[1]
    band = band_representation(d, hermite_seq, 8)
    assert band.band == (0, 0)
    test = left_fourier_test(band, build_L(hermite_seq), 3)
    assert test.status == "accept" and test.k <= 2
    x_band = band_representation(DiffOp.scalar(X), hermite_seq, 8)
    assert x_band.band == (-1, 1)


def test_recurrence_operator_commutes_with_itself(hermite_seq):
    l_op = build_L(hermite_seq)
    assert left_fourier_test(l_op, l_op, 2) == FourierTest("accept", 0, l_op.n_max - 1)


def test_third_derivative_needs_four_commutators(hermite_seq):
    l_op = build_L(hermite_seq)
    band = band_representation(DiffOp.dx() ** 3, hermite_seq, 8)
    assert band.band == (-3, -3)
    accepted = left_fourier_test(band, l_op, 3)
    assert (accepted.status, accepted.k) == ("accept", 3)
    rejected = left_fourier_test(band, l_op, 1)
    assert (rejected.status, rejected.k) == ("reject", None)


def test_exponential_diagonal_is_not_in_the_algebra(hermite_seq):
    l_op = build_L(hermite_seq)
    powers = ShiftOp.from_functions(1, l_op.n_max, {0: lambda n: CMat.of([[2**n]])})
    result = left_fourier_test(powers, l_op, 3)
    assert result.status == "reject"
    assert result.window >= 2


def test_short_window_is_inconclusive(hermite_seq):
    l_op = build_L(hermite_seq)
    powers = ShiftOp.from_functions(1, 2, {0: lambda n: CMat.of([[2**n]])})
    result = left_fourier_test(powers, l_op, 3)
    assert result.status == "inconclusive"
    assert result.k is None


def test_band_needs_polynomial_coefficients(hermite_seq):
    d = DiffOp.scalar(1 / (1 + X**2))
    with pytest.raises(ShapeMismatchError):
        band_representation(d, hermite_seq, 4)


def test_shift_products_shrink_the_window():
    one = CMat.identity(1)
    s = ShiftOp.of(1, 5, {1: [one] * 6})
    assert (s * s).n_max == 4
    assert (s * s).band == (2, 2)


def test_example_operators_are_in_dw(example):
    ex, seq = example
    for name, d in ex.operators.items():
        check = dw_membership(d, seq, 8)
        assert check.accepted, name
        assert check.eigen == ex.expected_eigen[name], name
        assert eigen_dagger_check(d, seq, 8) == []


def test_discrete_adjoint(example):
    ex, seq = example
    d = ex.operators["D3"]
    band = band_representation(d, seq, 8)
    assert bilinear_identity(band, seq) == []
    assert dagger_compatibility(d, seq, 8)
    sym = band_representation(ex.operators["D1"], seq, 8)
    assert (discrete_dagger(sym, seq) - sym.restrict(discrete_dagger(sym, seq).n_max)).is_zero()


def test_multiplicativity_and_positivity(example):
    ex, seq = example
    assert multiplicativity(ex.operators["D3"], ex.operators["D4"], 8)
    assert positivity_witness(ex.operators["D2"], seq, 8)
    assert positivity_witness(ex.operators["D3"], seq, 8)


def test_inverse_fourier_map(hermite_seq):
    lam = EigenvalueMatrix.from_function(lambda n: CMat.of([[-2 * n]]), 2)
    assert operator_from_eigenvalue(lam, hermite_seq, 2) == classical_kernel("hermite")[1]


def test_inverse_fourier_map_rebuilds_a_matrix_operator(example):
    ex, seq = example
    d = operator_from_eigenvalue(ex.expected_eigen["D4"], seq, 2)
    assert d == ex.operators["D4"]


def test_inverse_fourier_map_rejects_a_short_order(hermite_seq):
    lam = EigenvalueMatrix.from_function(lambda n: CMat.of([[n * n]]), 2)
    with pytest.raises(FiltrationError):
        operator_from_eigenvalue(lam, hermite_seq, 1)

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mopcheck.catalog import build_weight, hermite_example
from mopcheck.errors import ShapeMismatchError
from mopcheck.exact import X, MatRF, crat, poly_from_coeffs
from mopcheck.opalg import (
    DiffOp,
    KernelConjugator,
    ad_power,
    filtration_by_monomials,
    formal_dagger,
    formal_star,
    from_left,
    is_degree_filtration_preserving,
    op_apply,
    op_mul,
    random_operator,
    scalar_poly_in,
    to_left,
)
from mopcheck.specio import parse_operator
from mopcheck.weights import classical_kernel

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def dx_times(coeff, n: int = 1) -> DiffOp:
    """dx * coeff as a normal-form operator."""
    return DiffOp.of([MatRF.zeros(n), MatRF.scalar(coeff, n)], (n, n))


def random_poly_matrix(rng: random.Random, size: int, degree: int) -> MatRF:
    return MatRF(tuple(
        tuple(poly_from_coeffs([rng.randint(-4, 4) for _ in range(degree + 1)]) for _ in range(size))
        for _ in range(size)
    ))


def test_x_dx_relation():
    x_op = DiffOp.scalar(X)
    expected = DiffOp.of([MatRF.identity(1), MatRF.scalar(X, 1)], (1, 1))
    assert op_mul(x_op, DiffOp.dx()) == expected
    assert parse_operator("x*dx") == parse_operator("dx*x + 1")


def test_identity_is_neutral():
    d = hermite_example(2).operators["D3"]
    assert op_mul(DiffOp.identity(2), d) == d
    assert op_mul(d, DiffOp.identity(2)) == d


def test_dx_times_dx_x():
    product = op_mul(DiffOp.dx(), dx_times(X))
    assert product == DiffOp.of([MatRF.zeros(1), MatRF.zeros(1), MatRF.scalar(X, 1)], (1, 1))
    for k in range(7):
        f = MatRF.scalar(X**k, 1)
        assert op_apply(f, product) == op_apply(op_apply(f, DiffOp.dx()), dx_times(X))


def test_op_apply_examples():
    assert op_apply(MatRF.scalar(X**2, 1), DiffOp.dx() ** 2) == MatRF.scalar(2, 1)
    p = MatRF.of([[X, 1], [X**2, 3]])
    assert op_apply(p, DiffOp.identity(2)) == p
    hermite = classical_kernel("hermite")[1]
    assert op_apply(MatRF.scalar(X**3, 1), hermite) == MatRF.scalar(6 * X - 6 * X**3, 1)


def test_op_apply_shape_mismatch():
    with pytest.raises(ShapeMismatchError):
        op_apply(MatRF.identity(2), DiffOp.dx(3))
    with pytest.raises(ShapeMismatchError):
        op_mul(DiffOp.dx(2), DiffOp.dx(3))


def test_formal_star_examples():
    assert formal_star(DiffOp.dx()) == -DiffOp.dx()
    a = MatRF.of([[1, crat(0, 1)], [2, X]])
    assert formal_star(DiffOp.mult(a)) == DiffOp.mult(a.H)
    upper = DiffOp.of([MatRF.zeros(2), MatRF.of([[0, 1], [0, 0]])])
    lower = DiffOp.of([MatRF.zeros(2), MatRF.of([[0, 0], [1, 0]])])
    assert formal_star(upper) == -lower


def test_left_form_round_trip():
    d = hermite_example(2).operators["D4"]
    assert from_left(to_left(d), d.shape) == d


def test_classical_operators_are_symmetric():
    for name, params in (("hermite", {}), ("laguerre", {"b": "1/3"}), ("jacobi", {"a": "1/2", "b": "-1/4"})):
        weight = build_weight(name, params)
        k = weight.kernel
        d = classical_kernel(k.kind, k.a, k.b)[1]
        assert formal_dagger(d, weight) == d, name


def test_identity_is_self_adjoint():
    weight = build_weight("jacobi-2x2", {"a": 1, "r": 3})
    assert formal_dagger(DiffOp.identity(2), weight) == DiffOp.identity(2)


def test_hermite_first_operator_is_symmetric():
    ex = hermite_example(2)
    d1 = ex.operators["D1"]
    assert formal_dagger(d1, ex.weight) == d1


def test_kernel_conjugator_inverts():
    conj = KernelConjugator(-2 * X)
    d = classical_kernel("hermite")[1]
    assert conj.unconjugate(conj.conjugate(d)) == d
    assert conj.conjugate(DiffOp.dx()) == DiffOp.dx() + DiffOp.scalar(-2 * X)


def test_ad_sign():
    # x dx - dx x = 1 under the right action
    assert ad_power(DiffOp.scalar(X), DiffOp.dx(), 1) == DiffOp.identity(1)


def test_ad_power_examples():
    d = classical_kernel("laguerre", b=2)[1]
    assert ad_power(d, d, 1).is_zero()
    assert ad_power(DiffOp.scalar(X, 2), DiffOp.dx(2) ** 2, 3).is_zero()
    assert not ad_power(DiffOp.scalar(X, 2), DiffOp.dx(2) ** 2, 2).is_zero()
    with pytest.raises(ValueError):
        ad_power(d, d, 0)


def test_filtration():
    hermite = parse_operator("dx^2 - dx*2*x")
    assert is_degree_filtration_preserving(hermite)
    bad = is_degree_filtration_preserving(dx_times(X**2))
    assert not bad and bad.order == 1 and bad.entry == (0, 0)
    assert is_degree_filtration_preserving(hermite_example(3).operators["D3"])


def test_filtration_by_monomials_agrees():
    cases = [
        parse_operator("dx^2 - dx*2*x"),
        dx_times(X**2),
        parse_operator("dx*(1/(1+x^2))"),
        hermite_example(2).operators["D4"],
    ]
    for d in cases:
        assert bool(is_degree_filtration_preserving(d)) == filtration_by_monomials(d)


def test_scalar_poly_in():
    d = classical_kernel("hermite")[1]
    expected = DiffOp.identity(1) * crat(2) - d * crat(3) + op_mul(d, d)
    assert scalar_poly_in(d, [2, -3, 1]) == expected


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_right_action_is_compatible_with_products(seed):
    rng = random.Random(seed)
    a = random_operator(rng, 2, rng.randint(0, 3))
    b = random_operator(rng, 2, rng.randint(0, 3))
    f = random_poly_matrix(rng, 2, 5)
    assert op_apply(f, op_mul(a, b)) == op_apply(op_apply(f, a), b)


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_star_is_an_involutive_anti_automorphism(seed):
    rng = random.Random(seed)
    a = random_operator(rng, 2, rng.randint(0, 3), complex_entries=True)
    b = random_operator(rng, 2, rng.randint(0, 3), complex_entries=True)
    assert formal_star(formal_star(a)) == a
    assert formal_star(op_mul(a, b)) == op_mul(formal_star(b), formal_star(a))


ADJOINT_WEIGHTS = {
    "hermite-2x2": build_weight("hermite-2x2", {"a": "1/2"}),
    "laguerre-2x2": build_weight("laguerre-2x2", {"a": "1/2", "b": "1/3"}),
    "jacobi-2x2": build_weight("jacobi-2x2", {"a": "1", "r": "3"}),
}


@pytest.mark.parametrize("name", sorted(ADJOINT_WEIGHTS))
@settings(max_examples=50, deadline=None)
@given(seed=seeds)
def test_dagger_is_involutive(name, seed):
    rng = random.Random(seed)
    weight = ADJOINT_WEIGHTS[name]
    d = random_operator(rng, 2, rng.randint(0, 3), complex_entries=True)
    assert formal_dagger(formal_dagger(d, weight), weight) == d


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_random_operators_preserve_the_filtration(seed):
    d = random_operator(random.Random(seed), 2, 3)
    assert is_degree_filtration_preserving(d)
    assert filtration_by_monomials(d)

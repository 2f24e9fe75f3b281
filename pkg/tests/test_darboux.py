from fractions import Fraction

import pytest

from mopcheck.catalog import EXCEPTIONAL_OPERATORS, darboux_dataset
from mopcheck.darboux import DarbouxData, darboux_verify, eigenvalue_for_degree, exceptional_degrees, has_eigenfunction
from mopcheck.errors import ShapeMismatchError
from mopcheck.exact import FIELD
from mopcheck.opalg import DiffOp
from mopcheck.specio import parse_operator
from mopcheck.weights import classical_kernel


def test_exceptional_hermite_operator():
    d = parse_operator(EXCEPTIONAL_OPERATORS["exceptional-x2"])
    assert exceptional_degrees(d, 25) == [1, 2]
    assert not has_eigenfunction(d, 2)
    assert has_eigenfunction(d, 7)


def test_quoted_variant_loses_more_degrees():
    d = parse_operator(EXCEPTIONAL_OPERATORS["exceptional-x2-quoted"])
    assert {1, 2, 3} <= set(exceptional_degrees(d, 5))
    assert not has_eigenfunction(d, 3)


def test_classical_operator_has_every_degree():
    d = classical_kernel("hermite")[1]
    assert exceptional_degrees(d, 8) == []
    assert eigenvalue_for_degree(d, 4) == FIELD(-8)


def test_exceptional_degrees_need_a_scalar_operator():
    with pytest.raises(ShapeMismatchError):
        exceptional_degrees(DiffOp.dx(2), 3)


@pytest.mark.parametrize("name, params", [
    ("jacobi-conjugacy", {"a": Fraction(1, 2), "b": Fraction(1, 3)}),
    ("jacobi-conjugacy", {}),
    ("hermite-factorization", {}),
    ("laguerre-shift", {"b": Fraction(1, 3)}),
    ("hermite", {"a": 2}),
    ("jacobi", {"a": 1, "r": 3}),
])
def test_datasets_verify(name, params):
    data, ops = darboux_dataset(name, params)
    checks = darboux_verify(data, ops)
    assert checks
    assert all(c.passed for c in checks), [c for c in checks if not c.passed]


def test_factorization_checks_every_system_operator():
    data, ops = darboux_dataset("hermite-factorization")
    names = [c.name for c in darboux_verify(data, ops)]
    assert names == ["T T~ = diag(p_i(d_i) q(p_i(d_i)))", "T~ E_11 T = V_1 q(V_1)"]


def test_conjugacy_in_the_other_direction():
    data, _ = darboux_dataset("jacobi-conjugacy", {"a": Fraction(1, 2), "b": Fraction(1, 3)})
    swapped = DarbouxData(h=data.h, d=data.d_tilde, d_tilde=data.d)
    (check,) = darboux_verify(swapped)
    assert check.passed
    assert check.name == "h d~ = d h"
    assert check.detail == "holds with d and d~ exchanged"


def test_conjugacy_failure():
    data, _ = darboux_dataset("jacobi-conjugacy", {"a": Fraction(1, 2), "b": Fraction(1, 3)})
    broken = DarbouxData(h=DiffOp.identity(1), d=data.d, d_tilde=data.d_tilde)
    (check,) = darboux_verify(broken)
    assert not check.passed
    assert check.name == "h d = d~ h"


def test_wrong_sequence_shift_is_reported():
    data, _ = darboux_dataset("laguerre-shift", {"b": 0})
    wrong = DarbouxData(t=data.t, seq=data.seq, seq_tilde=data.seq_tilde,
                        c_of_n=lambda n: data.c_of_n(n + 1), shift=-1, n_win=4)
    (check,) = darboux_verify(wrong)
    assert not check.passed
    assert check.detail.startswith("n=")

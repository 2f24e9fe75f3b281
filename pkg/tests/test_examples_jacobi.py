from fractions import Fraction

import pytest

from mopcheck.catalog import jacobi_example
from mopcheck.reproduce import reproduce
from tests.conftest import certificate, value


@pytest.fixture(scope="module")
def report():
    return reproduce("jacobi", {"a": 1, "r": 3}, count=0)


def test_every_certificate_passes(report):
    failed = [c for c in report.certificates if c.status != "pass"]
    assert report.status == "pass", failed


@pytest.mark.parametrize("name", [
    "D1 in D(W)",
    "D2 in D(W)",
    "D3 in D(W)",
    "D4 in D(W)",
    "Lambda_D1(n) matches",
    "Lambda_D4(n) matches",
    "V1 is W-symmetric",
    "V_i V_j = 0 for i != j",
    "V1 + ... + VN is central",
    "Lambda of V1 + ... + VN matches",
    "U(x) matches",
    "r1 matches",
    "r2 matches",
    "v1 matches",
    "v2 matches",
    "v1: leading coefficient vanishes at x=1",
    "U D1 = diag(...) U",
    "U D2 = diag(...) U",
    "U V1 = diag(...) U",
    "U V2 = diag(...) U",
])
def test_key_certificates(report, name):
    assert certificate(report, name).status == "pass"


def test_values(report):
    assert value(report, "U(x)") == "[[x,1],[1,x]]"
    assert value(report, "Lambda_D2(n)") == "[[0,0],[0,n^2+4*n+4]]"


def test_notes_record_the_corrections(report):
    assert report.notes == list(jacobi_example(1, 3).notes)


def test_second_specialization():
    report = reproduce("jacobi", {"a": Fraction(1, 2), "r": Fraction(7, 3)}, count=0, n_win=8)
    assert report.status == "pass", [c for c in report.certificates if c.status != "pass"]

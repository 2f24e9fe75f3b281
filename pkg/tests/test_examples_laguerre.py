from fractions import Fraction

import pytest

from mopcheck.catalog import laguerre_example
from mopcheck.reproduce import reproduce
from tests.conftest import HALF, THIRD, certificate, value


@pytest.fixture(scope="module")
def report():
    return reproduce("laguerre", {"a": HALF, "b": THIRD}, count=0)


def test_every_certificate_passes(report):
    failed = [c for c in report.certificates if c.status != "pass"]
    assert report.status == "pass", failed


@pytest.mark.parametrize("name", [
    "D in D(W)",
    "Lambda_D(n) matches",
    "D1 in D(W)",
    "D2 in D(W)",
    "Lambda_D1(n) matches",
    "Lambda_D2(n) matches",
    "V1 is W-symmetric",
    "V2 is W-symmetric",
    "V1 + ... + VN is central",
    "Lambda of V1 + ... + VN matches",
    "U(x) matches",
    "r1 matches",
    "r2 matches",
    "v1 is a polynomial in d",
    "v2 is a polynomial in d",
    "U D = diag(...) U",
])
def test_key_certificates(report, name):
    assert certificate(report, name).status == "pass"


def test_rebuilt_operators_are_reported(report):
    assert "[[" in value(report, "D1")
    assert value(report, "D1 printed entries reproduced")
    assert value(report, "r1 kernel exponents") == "x:" + str(THIRD + 2)


def test_notes_record_the_corrections(report):
    notes = laguerre_example(HALF, THIRD).notes
    assert report.notes == list(notes)
    assert any("x I" in n for n in notes)


def test_negative_parameters():
    report = reproduce("laguerre", {"a": Fraction(-3, 2), "b": Fraction(-1, 2)}, count=0, n_win=8)
    assert report.status == "pass", [c for c in report.certificates if c.status != "pass"]

import pytest

from mopcheck.catalog import hermite_example
from mopcheck.reproduce import reproduce
from tests.conftest import certificate, value


@pytest.fixture(scope="module")
def report():
    return reproduce("hermite", {"a": 2}, count=0)


def test_every_certificate_passes(report):
    failed = [c for c in report.certificates if c.status != "pass"]
    assert report.status == "pass", failed


@pytest.mark.parametrize("name", [
    "D1 in D(W)",
    "D4 in D(W)",
    "Lambda_D3(n) matches",
    "V1 is W-symmetric",
    "V2 is W-symmetric",
    "V_i V_j = 0 for i != j",
    "V1 + ... + VN is not central",
    "Lambda_V2(n) matches",
    "u1 agrees with the computed generator up to a left factor",
    "u2 agrees with the computed generator up to a left factor",
    "U(x) matches",
    "U W U^* is diagonal",
    "r1 matches",
    "r2 matches",
    "v1 matches",
    "v2 matches",
    "U V1 = diag(...) U",
    "U V2 = diag(...) U",
])
def test_key_certificates(report, name):
    assert certificate(report, name).status == "pass"


def test_values(report):
    assert value(report, "U(x)") == "[[1,-2*x],[0,1]]"
    assert value(report, "Lambda_D1(n)") == "[[-2*n-2,0],[0,-2*n]]"
    assert value(report, "r1(x)") == "e^(-x^2)*(1)"


def test_notes_record_the_corrections(report):
    assert report.notes == list(hermite_example(2).notes)


def test_random_specialization():
    report = reproduce("hermite", seed=7, count=1, n_win=8)
    assert report.inputs["specializations"] == "1"
    assert report.status == "pass", [c for c in report.certificates if c.status != "pass"]

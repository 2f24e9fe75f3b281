from fractions import Fraction

import pytest
from hypothesis import strategies as st

from mopcheck.exact import crat, poly_from_coeffs


@pytest.fixture(autouse=True)
def serial(monkeypatch):
    monkeypatch.setenv("MOP_NO_PARALLEL", "1")


small_fractions = st.fractions(min_value=-20, max_value=20, max_denominator=12)
gaussian = st.builds(crat, small_fractions, small_fractions)
nonzero_gaussian = gaussian.filter(lambda c: c.x or c.y)
polynomials = st.lists(gaussian, min_size=1, max_size=4).map(poly_from_coeffs)
nonzero_polynomials = polynomials.filter(bool)


def certificate(report, name: str):
    """The certificate whose name ends with `name` (reports prefix names per specialization)."""
    found = [c for c in report.certificates if c.name.endswith(name)]
    assert found, f"no certificate named {name!r}"
    return found[0]


def value(report, name: str) -> str:
    found = [v for k, v in report.values.items() if k.endswith(name)]
    assert found, f"no value named {name!r}"
    return found[0]


HALF = Fraction(1, 2)
THIRD = Fraction(1, 3)

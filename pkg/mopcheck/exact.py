"""Exact arithmetic kernel -- Gaussian rationals, rational functions in x and
small matrices over both.

Scalars are sympy ``QQ_I`` elements (pairs of reduced rationals). Rational
functions are elements of the fraction field ``QQ_I(x)``; sympy cancels after
every operation, so equality is structural. Three matrix types sit on top:

  CMat    -- constant matrices over QQ_I (moments, norms, recurrence data)
  MatPoly -- polynomial matrices as ascending lists of CMat coefficients
  MatRF   -- matrices over QQ_I(x) (operator coefficients, weight factors)
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from sympy.polys.domains import QQ, QQ_I
from sympy.polys.domains.gaussiandomains import GaussianRational
from sympy.polys.fields import FracElement, field
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.exceptions import DMNonInvertibleMatrixError
from sympy.polys.rings import PolyElement

from mopcheck.errors import ExactArithmeticError, ShapeMismatchError, SingularMatrixError

FIELD, X = field("x", QQ_I)
RING = FIELD.ring
FIELD_DOMAIN = FIELD.to_domain()

NO_DEGREE = -1  # degree of the zero polynomial

ZERO = QQ_I(0, 0)
ONE = QQ_I(1, 0)

_SCALARS = (int, Fraction, str, GaussianRational, FracElement, PolyElement, type(QQ(0)))


# ---------------------------------------------------------------------------
# Scalars
# ---------------------------------------------------------------------------

def qq(value):
    """Coerce int / Fraction / "p/q" / QQ element to a QQ element."""
    if isinstance(value, QQ.dtype):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a rational")
    if isinstance(value, int):
        return QQ(value)
    if isinstance(value, str):
        value = Fraction(value)
    if isinstance(value, Fraction):
        return QQ(value.numerator, value.denominator)
    raise TypeError(f"cannot read {value!r} as a rational")


def crat(value, imag=0) -> GaussianRational:
    """Coerce to a Gaussian rational re + im*i."""
    if isinstance(value, GaussianRational):
        if imag:
            return value + crat(0, imag)
        return value
    return QQ_I(qq(value), qq(imag))


def cconj(c: GaussianRational) -> GaussianRational:
    return QQ_I(c.x, -c.y)


def c_is_zero(c: GaussianRational) -> bool:
    return not c.x and not c.y


def c_is_real(c: GaussianRational) -> bool:
    return not c.y


def to_fraction(q) -> Fraction:
    return Fraction(int(q.numerator), int(q.denominator))


def real_part(c: GaussianRational) -> Fraction:
    return to_fraction(c.x)


def imag_part(c: GaussianRational) -> Fraction:
    return to_fraction(c.y)


# ---------------------------------------------------------------------------
# Rational functions
# ---------------------------------------------------------------------------

def rf(value) -> FracElement:
    """Coerce a scalar, polynomial or rational function to an element of QQ_I(x)."""
    if isinstance(value, FracElement):
        return value
    if isinstance(value, PolyElement):
        return FIELD.new(value)
    return FIELD(crat(value))


def poly_from_coeffs(coeffs: Sequence) -> FracElement:
    """Ascending coefficients -> polynomial."""
    out = FIELD.zero
    for k, c in enumerate(coeffs):
        c = crat(c)
        if not c_is_zero(c):
            out += FIELD(c) * X**k
    return out


def is_polynomial(f: FracElement) -> bool:
    return f.denom.is_ground


def is_constant(f: FracElement) -> bool:
    return f.numer.is_ground and f.denom.is_ground


def _poly_part(f: FracElement) -> PolyElement:
    if not is_polynomial(f):
        raise ExactArithmeticError(f"not a polynomial: {f}")
    return f.numer.quo_ground(f.denom.LC)


def poly_coeffs(f: FracElement) -> list[GaussianRational]:
    """Ascending coefficients of a polynomial (empty list for zero)."""
    p = _poly_part(f)
    terms = p.terms()
    if not terms:
        return []
    out = [ZERO] * (max(m[0] for m, _ in terms) + 1)
    for (k,), c in terms:
        out[k] = c
    return out


def degree(f: FracElement) -> int:
    if not f:
        return NO_DEGREE
    return len(poly_coeffs(f)) - 1


def constant_value(f: FracElement) -> GaussianRational:
    if not is_constant(f):
        raise ExactArithmeticError(f"not a constant: {f}")
    if not f:
        return ZERO
    return f.numer.LC / f.denom.LC


def numer_denom_degrees(f: FracElement) -> tuple[int, int]:
    num = f.numer.degree() if f.numer else NO_DEGREE
    return int(num), int(f.denom.degree())


def deriv(f: FracElement) -> FracElement:
    # FracElement.diff needs denom == 1, which QQ_I's unit fails on newer sympy
    x = RING.gens[0]
    num, den = f.numer, f.denom
    return FIELD.new(num.diff(x) * den - num * den.diff(x), den**2)


def _conj_poly(p: PolyElement) -> PolyElement:
    return RING.from_dict({m: cconj(c) for m, c in p.terms()})


def conj(f: FracElement) -> FracElement:
    """Conjugate coefficients: the value at real x is complex-conjugated."""
    return FIELD.new(_conj_poly(f.numer), _conj_poly(f.denom))


def _horner(p: PolyElement, t: GaussianRational) -> GaussianRational:
    terms = p.terms()
    if not terms:
        return ZERO
    top = max(m[0] for m, _ in terms)
    dense = [ZERO] * (top + 1)
    for (k,), c in terms:
        dense[k] = c
    acc = ZERO
    for c in reversed(dense):
        acc = acc * t + c
    return acc


def evaluate(f: FracElement, point) -> GaussianRational:
    t = crat(point)
    den = _horner(f.denom, t)
    if c_is_zero(den):
        raise ExactArithmeticError(f"pole of {f} at {point}")
    return _horner(f.numer, t) / den


def ratfun_arith(a, b, op: str) -> FracElement:
    a, b = rf(a), rf(b)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        if not b:
            raise ExactArithmeticError("division by the zero rational function")
        return a / b
    raise ValueError(f"unknown op {op!r}")


def poly_gcd(a, b) -> FracElement:
    """Monic gcd of two polynomials."""
    pa, pb = _poly_part(rf(a)), _poly_part(rf(b))
    if not pa and not pb:
        raise ExactArithmeticError("gcd(0, 0) is undefined")
    g = pa.gcd(pb)
    return FIELD.new(g.monic())


def poly_rem(a, b) -> FracElement:
    pa, pb = _poly_part(rf(a)), _poly_part(rf(b))
    if not pb:
        raise ExactArithmeticError("division by the zero polynomial")
    return FIELD.new(pa.rem(pb))


def denominator_lcm(values: Iterable[FracElement]) -> FracElement:
    acc = RING.one
    for f in values:
        acc = acc.lcm(f.denom)
    return FIELD.new(acc.monic())


def root_multiplicity(f: FracElement, root) -> int:
    """Multiplicity of x = root as a zero of the numerator of f (f nonzero)."""
    if not f:
        raise ExactArithmeticError("multiplicity in the zero function")
    factor = RING.from_dict({(1,): ONE, (0,): -crat(root)})
    p = f.numer
    count = 0
    while True:
        q, r = p.div(factor)
        if r:
            return count
        p, count = q, count + 1


# ---------------------------------------------------------------------------
# Constant matrices over QQ_I
# ---------------------------------------------------------------------------

def _dm_entries(dm: DomainMatrix) -> list[list]:
    rows, cols = dm.shape
    return [[dm[i, j].element for j in range(cols)] for i in range(rows)]


@dataclass(frozen=True)
class CMat:
    rows: tuple[tuple[GaussianRational, ...], ...]

    @classmethod
    def of(cls, rows: Iterable[Iterable]) -> "CMat":
        out = tuple(tuple(crat(v) for v in row) for row in rows)
        if not out or len({len(r) for r in out}) != 1 or not out[0]:
            raise ShapeMismatchError("matrix must be rectangular and nonempty")
        return cls(out)

    @classmethod
    def zeros(cls, n_rows: int, n_cols: int | None = None) -> "CMat":
        n_cols = n_rows if n_cols is None else n_cols
        return cls(tuple(tuple(ZERO for _ in range(n_cols)) for _ in range(n_rows)))

    @classmethod
    def identity(cls, n: int) -> "CMat":
        return cls(tuple(tuple(ONE if i == j else ZERO for j in range(n)) for i in range(n)))

    @classmethod
    def diag(cls, values: Sequence) -> "CMat":
        n = len(values)
        return cls(tuple(tuple(crat(values[i]) if i == j else ZERO for j in range(n)) for i in range(n)))

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), len(self.rows[0])

    def __getitem__(self, ij: tuple[int, int]) -> GaussianRational:
        i, j = ij
        return self.rows[i][j]

    def _check_same(self, other: "CMat"):
        if self.shape != other.shape:
            raise ShapeMismatchError(f"{self.shape} vs {other.shape}")

    def __add__(self, other: "CMat") -> "CMat":
        self._check_same(other)
        return CMat(tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(self.rows, other.rows)))

    def __sub__(self, other: "CMat") -> "CMat":
        self._check_same(other)
        return CMat(tuple(tuple(a - b for a, b in zip(r, s)) for r, s in zip(self.rows, other.rows)))

    def __neg__(self) -> "CMat":
        return CMat(tuple(tuple(-a for a in r) for r in self.rows))

    def scale(self, c) -> "CMat":
        c = crat(c)
        return CMat(tuple(tuple(c * a for a in r) for r in self.rows))

    def __mul__(self, other):
        if not isinstance(other, CMat):
            if not isinstance(other, _SCALARS):
                return NotImplemented
            return self.scale(other)
        n, k = self.shape
        k2, m = other.shape
        if k != k2:
            raise ShapeMismatchError(f"cannot multiply {self.shape} by {other.shape}")
        cols = list(zip(*other.rows))
        out = []
        for row in self.rows:
            line = []
            for col in cols:
                acc = ZERO
                for a, b in zip(row, col):
                    if not c_is_zero(a) and not c_is_zero(b):
                        acc += a * b
                line.append(acc)
            out.append(tuple(line))
        return CMat(tuple(out))

    def __rmul__(self, c):
        return self.scale(c)

    @property
    def H(self) -> "CMat":
        return CMat(tuple(tuple(cconj(a) for a in col) for col in zip(*self.rows)))

    @property
    def T(self) -> "CMat":
        return CMat(tuple(tuple(col) for col in zip(*self.rows)))

    def is_zero(self) -> bool:
        return all(c_is_zero(a) for r in self.rows for a in r)

    def is_hermitian(self) -> bool:
        return self == self.H

    def to_domain_matrix(self) -> DomainMatrix:
        return DomainMatrix([list(r) for r in self.rows], self.shape, QQ_I)

    @classmethod
    def from_domain_matrix(cls, dm: DomainMatrix) -> "CMat":
        return cls(tuple(tuple(r) for r in _dm_entries(dm)))

    def det(self) -> GaussianRational:
        return self.to_domain_matrix().det()

    def inv(self) -> "CMat":
        n, m = self.shape
        if n != m:
            raise ShapeMismatchError("inverse of a non-square matrix")
        try:
            return CMat.from_domain_matrix(self.to_domain_matrix().inv())
        except DMNonInvertibleMatrixError as e:
            raise SingularMatrixError(str(e)) from e

    def leading_minors(self) -> list[GaussianRational]:
        n = self.shape[0]
        return [CMat(tuple(r[:k] for r in self.rows[:k])).det() for k in range(1, n + 1)]

    def is_positive_definite(self) -> bool:
        """Exact Sylvester test for a Hermitian matrix."""
        if not self.is_hermitian():
            return False
        for m in self.leading_minors():
            if not c_is_real(m) or real_part(m) <= 0:
                return False
        return True


def solve_constant(a: CMat, b: CMat) -> CMat:
    """Solve a * x = b exactly."""
    try:
        sol = a.to_domain_matrix().lu_solve(b.to_domain_matrix())
    except DMNonInvertibleMatrixError as e:
        raise SingularMatrixError(str(e)) from e
    return CMat.from_domain_matrix(sol)


def rref_solve(rows: list[list], rhs: list, domain) -> tuple[list | None, int]:
    """Solve rows * v = rhs over a field domain.

    Returns (solution with free variables set to zero or None if inconsistent,
    number of pivots).
    """
    n_cols = len(rows[0]) if rows else 0
    if not rows:
        return [domain.zero] * n_cols, 0
    aug = DomainMatrix([list(r) + [v] for r, v in zip(rows, rhs)], (len(rows), n_cols + 1), domain)
    red, pivots = aug.rref()
    pivots = list(pivots)
    if n_cols in pivots:
        return None, len(pivots) - 1
    sol = [domain.zero] * n_cols
    entries = _dm_entries(red)
    for r, p in enumerate(pivots):
        sol[p] = entries[r][n_cols]
    return sol, len(pivots)


def nullspace(rows: list[list], n_cols: int, domain) -> list[list]:
    """Basis of {v : rows * v = 0} over a field domain."""
    if not rows:
        return [[domain.one if i == j else domain.zero for i in range(n_cols)] for j in range(n_cols)]
    dm = DomainMatrix([list(r) for r in rows], (len(rows), n_cols), domain)
    ns = dm.nullspace()
    if ns.shape[0] == 0 or ns.shape[1] == 0:
        return []
    basis = _dm_entries(ns)
    return [v for v in basis if any(v)]


# ---------------------------------------------------------------------------
# Polynomial matrices
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MatPoly:
    """Sum_k coeffs[k] * x^k; no trailing zero coefficient."""

    shape: tuple[int, int]
    coeffs: tuple[CMat, ...]

    @classmethod
    def of(cls, coeffs: Sequence[CMat], shape: tuple[int, int] | None = None) -> "MatPoly":
        coeffs = list(coeffs)
        if shape is None:
            if not coeffs:
                raise ShapeMismatchError("shape required for the zero polynomial")
            shape = coeffs[0].shape
        while coeffs and coeffs[-1].is_zero():
            coeffs.pop()
        return cls(shape, tuple(coeffs))

    @classmethod
    def constant(cls, m: CMat) -> "MatPoly":
        return cls.of([m])

    @classmethod
    def monomial(cls, k: int, m: CMat) -> "MatPoly":
        return cls.of([CMat.zeros(*m.shape)] * k + [m])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def coeff(self, k: int) -> CMat:
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return CMat.zeros(*self.shape)

    @property
    def leading(self) -> CMat:
        return self.coeff(self.degree)

    def is_zero(self) -> bool:
        return not self.coeffs

    def __add__(self, other: "MatPoly") -> "MatPoly":
        n = max(len(self.coeffs), len(other.coeffs))
        return MatPoly.of([self.coeff(k) + other.coeff(k) for k in range(n)], self.shape)

    def __sub__(self, other: "MatPoly") -> "MatPoly":
        n = max(len(self.coeffs), len(other.coeffs))
        return MatPoly.of([self.coeff(k) - other.coeff(k) for k in range(n)], self.shape)

    def __neg__(self) -> "MatPoly":
        return MatPoly(self.shape, tuple(-c for c in self.coeffs))

    def __mul__(self, other) -> "MatPoly":
        if isinstance(other, CMat):
            return MatPoly.of([c * other for c in self.coeffs], (self.shape[0], other.shape[1]))
        if isinstance(other, MatPoly):
            shape = (self.shape[0], other.shape[1])
            if not self.coeffs or not other.coeffs:
                return MatPoly.of([], shape)
            out = [CMat.zeros(*shape) for _ in range(len(self.coeffs) + len(other.coeffs) - 1)]
            for i, a in enumerate(self.coeffs):
                for j, b in enumerate(other.coeffs):
                    out[i + j] = out[i + j] + a * b
            return MatPoly.of(out, shape)
        return MatPoly.of([c.scale(other) for c in self.coeffs], self.shape)

    def __rmul__(self, other) -> "MatPoly":
        if isinstance(other, CMat):
            return MatPoly.of([other * c for c in self.coeffs], (other.shape[0], self.shape[1]))
        return self * other

    def shift(self, k: int) -> "MatPoly":
        """Multiply by x^k."""
        if not self.coeffs:
            return self
        return MatPoly(self.shape, tuple([CMat.zeros(*self.shape)] * k) + self.coeffs)

    def diff(self) -> "MatPoly":
        return MatPoly.of([c.scale(k) for k, c in enumerate(self.coeffs)][1:], self.shape)

    @property
    def H(self) -> "MatPoly":
        return MatPoly.of([c.H for c in self.coeffs], (self.shape[1], self.shape[0]))

    def to_matrf(self) -> "MatRF":
        n, m = self.shape
        return MatRF(tuple(
            tuple(poly_from_coeffs([c[i, j] for c in self.coeffs]) for j in range(m))
            for i in range(n)
        ))


# ---------------------------------------------------------------------------
# Matrices over QQ_I(x)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MatRF:
    rows: tuple[tuple[FracElement, ...], ...]

    @classmethod
    def of(cls, rows: Iterable[Iterable]) -> "MatRF":
        out = tuple(tuple(rf(v) for v in row) for row in rows)
        if not out or len({len(r) for r in out}) != 1 or not out[0]:
            raise ShapeMismatchError("matrix must be rectangular and nonempty")
        return cls(out)

    @classmethod
    def zeros(cls, n_rows: int, n_cols: int | None = None) -> "MatRF":
        n_cols = n_rows if n_cols is None else n_cols
        return cls(tuple(tuple(FIELD.zero for _ in range(n_cols)) for _ in range(n_rows)))

    @classmethod
    def identity(cls, n: int) -> "MatRF":
        return cls.scalar(FIELD.one, n)

    @classmethod
    def scalar(cls, f, n: int) -> "MatRF":
        f = rf(f)
        return cls(tuple(tuple(f if i == j else FIELD.zero for j in range(n)) for i in range(n)))

    @classmethod
    def diag(cls, values: Sequence) -> "MatRF":
        n = len(values)
        return cls(tuple(tuple(rf(values[i]) if i == j else FIELD.zero for j in range(n)) for i in range(n)))

    @classmethod
    def from_cmat(cls, m: CMat) -> "MatRF":
        return cls(tuple(tuple(FIELD(a) for a in r) for r in m.rows))

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), len(self.rows[0])

    def __getitem__(self, ij: tuple[int, int]) -> FracElement:
        i, j = ij
        return self.rows[i][j]

    def entries(self) -> Iterable[FracElement]:
        for r in self.rows:
            yield from r

    def map(self, fn) -> "MatRF":
        return MatRF(tuple(tuple(fn(a) for a in r) for r in self.rows))

    def _check_same(self, other: "MatRF"):
        if self.shape != other.shape:
            raise ShapeMismatchError(f"{self.shape} vs {other.shape}")

    def __add__(self, other: "MatRF") -> "MatRF":
        self._check_same(other)
        return MatRF(tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(self.rows, other.rows)))

    def __sub__(self, other: "MatRF") -> "MatRF":
        self._check_same(other)
        return MatRF(tuple(tuple(a - b for a, b in zip(r, s)) for r, s in zip(self.rows, other.rows)))

    def __neg__(self) -> "MatRF":
        return self.map(lambda a: -a)

    def scale(self, f) -> "MatRF":
        f = rf(f)
        return self.map(lambda a: a * f)

    def __mul__(self, other):
        if not isinstance(other, MatRF):
            if not isinstance(other, _SCALARS):
                return NotImplemented
            return self.scale(other)
        n, k = self.shape
        k2, m = other.shape
        if k != k2:
            raise ShapeMismatchError(f"cannot multiply {self.shape} by {other.shape}")
        cols = list(zip(*other.rows))
        out = []
        for row in self.rows:
            line = []
            for col in cols:
                acc = FIELD.zero
                for a, b in zip(row, col):
                    if a and b:
                        acc += a * b
                line.append(acc)
            out.append(tuple(line))
        return MatRF(tuple(out))

    def __rmul__(self, f):
        return self.scale(f)

    def diff(self) -> "MatRF":
        return self.map(deriv)

    @property
    def T(self) -> "MatRF":
        return MatRF(tuple(tuple(col) for col in zip(*self.rows)))

    @property
    def H(self) -> "MatRF":
        """Conjugate transpose, x treated as real."""
        return MatRF(tuple(tuple(conj(a) for a in col) for col in zip(*self.rows)))

    def is_zero(self) -> bool:
        return not any(self.entries())

    def is_polynomial(self) -> bool:
        return all(is_polynomial(a) for a in self.entries())

    def is_constant(self) -> bool:
        return all(is_constant(a) for a in self.entries())

    def max_degree(self) -> int:
        return max(degree(a) for a in self.entries())

    def to_cmat(self) -> CMat:
        return CMat(tuple(tuple(constant_value(a) for a in r) for r in self.rows))

    def to_matpoly(self) -> MatPoly:
        n, m = self.shape
        grid = [[poly_coeffs(self[i, j]) for j in range(m)] for i in range(n)]
        top = max((len(c) for row in grid for c in row), default=0)
        coeffs = []
        for k in range(top):
            coeffs.append(CMat(tuple(
                tuple(grid[i][j][k] if k < len(grid[i][j]) else ZERO for j in range(m))
                for i in range(n)
            )))
        return MatPoly.of(coeffs, (n, m))

    def evaluate(self, point) -> CMat:
        return CMat(tuple(tuple(evaluate(a, point) for a in r) for r in self.rows))

    def to_domain_matrix(self) -> DomainMatrix:
        return DomainMatrix([list(r) for r in self.rows], self.shape, FIELD_DOMAIN)


def mat_det(m: MatRF) -> FracElement:
    if m.shape[0] != m.shape[1]:
        raise ShapeMismatchError("determinant of a non-square matrix")
    return m.to_domain_matrix().det()


def mat_inv(m: MatRF) -> MatRF:
    """Exact inverse over QQ_I(x)."""
    if m.shape[0] != m.shape[1]:
        raise ShapeMismatchError("inverse of a non-square matrix")
    if not mat_det(m):
        raise SingularMatrixError("determinant is identically zero")
    inv = m.to_domain_matrix().inv()
    return MatRF(tuple(tuple(r) for r in _dm_entries(inv)))

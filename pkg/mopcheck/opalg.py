"""Right-acting matrix differential operators D = sum_j dx^j A_j(x).

Normal form keeps powers of dx on the left and coefficients on the right; a
polynomial F acts as F.D = sum_j F^(j) A_j. With this action x.dx - dx.x = 1 and
the commutation rule A dx = dx A + A' holds.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Sequence

from sympy.polys.fields import FracElement

from mopcheck.errors import ShapeMismatchError, SingularMatrixError, WeightError
from mopcheck.exact import X, MatPoly, MatRF, crat, degree, is_polynomial, mat_inv, poly_from_coeffs, rf


@dataclass(frozen=True)
class DiffOp:
    shape: tuple[int, int]
    coeffs: tuple[MatRF, ...]  # coeffs[j] multiplies dx^j; top one nonzero

    @classmethod
    def of(cls, coeffs: Sequence[MatRF], shape: tuple[int, int] | None = None) -> "DiffOp":
        coeffs = list(coeffs)
        if shape is None:
            if not coeffs:
                raise ShapeMismatchError("shape required for the zero operator")
            shape = coeffs[0].shape
        for c in coeffs:
            if c.shape != shape:
                raise ShapeMismatchError(f"coefficient {c.shape} in a {shape} operator")
        while coeffs and coeffs[-1].is_zero():
            coeffs.pop()
        return cls(shape, tuple(coeffs))

    @classmethod
    def zero(cls, n_rows: int, n_cols: int | None = None) -> "DiffOp":
        return cls((n_rows, n_rows if n_cols is None else n_cols), ())

    @classmethod
    def mult(cls, m: MatRF) -> "DiffOp":
        return cls.of([m], m.shape)

    @classmethod
    def identity(cls, n: int) -> "DiffOp":
        return cls.mult(MatRF.identity(n))

    @classmethod
    def scalar(cls, f, n: int = 1) -> "DiffOp":
        return cls.mult(MatRF.scalar(f, n))

    @classmethod
    def dx(cls, n: int = 1) -> "DiffOp":
        return cls.of([MatRF.zeros(n), MatRF.identity(n)], (n, n))

    @classmethod
    def from_grid(cls, grid: Sequence[Sequence["DiffOp"]]) -> "DiffOp":
        """Assemble an operator from a grid of 1x1 operators."""
        n, m = len(grid), len(grid[0])
        if any(len(row) != m for row in grid):
            raise ShapeMismatchError("non-rectangular operator grid")
        top = max((e.order for row in grid for e in row), default=-1)
        coeffs = []
        for j in range(top + 1):
            coeffs.append(MatRF(tuple(
                tuple(grid[i][k].coeff(j)[0, 0] for k in range(m)) for i in range(n)
            )))
        return cls.of(coeffs, (n, m))

    @classmethod
    def vstack(cls, rows: Sequence["DiffOp"]) -> "DiffOp":
        return cls.from_grid([[r.entry(0, k) for k in range(r.shape[1])] for r in rows])

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def coeff(self, j: int) -> MatRF:
        if 0 <= j < len(self.coeffs):
            return self.coeffs[j]
        return MatRF.zeros(*self.shape)

    @property
    def leading(self) -> MatRF:
        return self.coeff(self.order)

    def is_zero(self) -> bool:
        return not self.coeffs

    def entry(self, i: int, k: int) -> "DiffOp":
        return DiffOp.of([MatRF(((c[i, k],),)) for c in self.coeffs], (1, 1))

    def __add__(self, other: "DiffOp") -> "DiffOp":
        if self.shape != other.shape:
            raise ShapeMismatchError(f"{self.shape} vs {other.shape}")
        n = max(len(self.coeffs), len(other.coeffs))
        return DiffOp.of([self.coeff(j) + other.coeff(j) for j in range(n)], self.shape)

    def __neg__(self) -> "DiffOp":
        return DiffOp(self.shape, tuple(-c for c in self.coeffs))

    def __sub__(self, other: "DiffOp") -> "DiffOp":
        return self + (-other)

    def __mul__(self, other) -> "DiffOp":
        if isinstance(other, DiffOp):
            return op_mul(self, other)
        if isinstance(other, MatRF):
            return op_mul(self, DiffOp.mult(other))
        # right multiplication by a scalar function only touches the coefficients
        f = rf(other)
        return DiffOp.of([c.scale(f) for c in self.coeffs], self.shape)

    def __rmul__(self, other) -> "DiffOp":
        if isinstance(other, MatRF):
            return op_mul(DiffOp.mult(other), self)
        return op_mul(DiffOp.scalar(other, self.shape[0]), self)

    def __pow__(self, k: int) -> "DiffOp":
        if self.shape[0] != self.shape[1] or k < 0:
            raise ShapeMismatchError("powers need a square operator and k >= 0")
        out = DiffOp.identity(self.shape[0])
        for _ in range(k):
            out = op_mul(out, self)
        return out

    def plus_scalar(self, c) -> "DiffOp":
        return self + DiffOp.scalar(c, self.shape[0])

    def map_coeffs(self, fn) -> "DiffOp":
        return DiffOp.of([c.map(fn) for c in self.coeffs], self.shape)


def _derivatives(m: MatRF, count: int) -> list[MatRF]:
    out = [m]
    for _ in range(count):
        out.append(out[-1].diff())
    return out


def op_mul(a: DiffOp, b: DiffOp) -> DiffOp:
    """Normal-ordered product: (dx^i A)(dx^j B) = sum_t C(j,t) dx^(i+j-t) A^(t) B."""
    if a.shape[1] != b.shape[0]:
        raise ShapeMismatchError(f"cannot multiply {a.shape} by {b.shape}")
    shape = (a.shape[0], b.shape[1])
    if a.is_zero() or b.is_zero():
        return DiffOp.zero(*shape)
    out = [MatRF.zeros(*shape) for _ in range(a.order + b.order + 1)]
    for i, ai in enumerate(a.coeffs):
        if ai.is_zero():
            continue
        derivs = _derivatives(ai, b.order)
        for j, bj in enumerate(b.coeffs):
            if bj.is_zero():
                continue
            for t in range(j + 1):
                if derivs[t].is_zero():
                    break
                out[i + j - t] = out[i + j - t] + (derivs[t] * bj).scale(comb(j, t))
    return DiffOp.of(out, shape)


def op_apply(f: MatRF, d: DiffOp) -> MatRF:
    """Right action F.D = sum_j F^(j) A_j."""
    if f.shape[1] != d.shape[0]:
        raise ShapeMismatchError(f"cannot apply a {d.shape} operator to {f.shape}")
    out = MatRF.zeros(f.shape[0], d.shape[1])
    fj = f
    for j, aj in enumerate(d.coeffs):
        if j:
            fj = fj.diff()
        out = out + fj * aj
    return out


def to_left(d: DiffOp) -> list[MatRF]:
    """Coefficients L_j with D = sum_j L_j dx^j, using dx A = A dx - A'."""
    out = [MatRF.zeros(*d.shape) for _ in range(d.order + 1)]
    for j, aj in enumerate(d.coeffs):
        derivs = _derivatives(aj, j)
        for t in range(j + 1):
            out[j - t] = out[j - t] + derivs[t].scale(comb(j, t) * (-1) ** t)
    return out


def from_left(coeffs: Sequence[MatRF], shape: tuple[int, int]) -> DiffOp:
    """Normal form of sum_j L_j dx^j."""
    out = [MatRF.zeros(*shape) for _ in range(len(coeffs))]
    for j, lj in enumerate(coeffs):
        derivs = _derivatives(lj, j)
        for t in range(j + 1):
            out[j - t] = out[j - t] + derivs[t].scale(comb(j, t))
    return DiffOp.of(out, shape)


def formal_star(d: DiffOp) -> DiffOp:
    """Skew-linear anti-automorphism: A -> A* (conjugate transpose), dx -> -dx."""
    shape = (d.shape[1], d.shape[0])
    return from_left([c.H.scale((-1) ** j) for j, c in enumerate(d.coeffs)], shape)


def substitute_shift(d: DiffOp, s: FracElement) -> DiffOp:
    """D with dx replaced by dx + s."""
    n = d.shape[0]
    step = DiffOp.dx(n) + DiffOp.scalar(s, n)
    power = DiffOp.identity(n)
    out = DiffOp.zero(*d.shape)
    for j, aj in enumerate(d.coeffs):
        if j:
            power = op_mul(power, step)
        if not aj.is_zero():
            out = out + op_mul(power, DiffOp.mult(aj))
    return out


@dataclass(frozen=True)
class KernelConjugator:
    """Moves a scalar kernel f with f'/f = s across operators: f dx f^-1 = dx + s."""

    s: FracElement

    def conjugate(self, d: DiffOp) -> DiffOp:
        """f D f^-1."""
        return substitute_shift(d, self.s)

    def unconjugate(self, d: DiffOp) -> DiffOp:
        """f^-1 D f."""
        return substitute_shift(d, -self.s)


def formal_dagger(d: DiffOp, weight) -> DiffOp:
    """W D* W^-1 for W = f Q, computed as f (Q D* Q^-1) f^-1."""
    q = weight.factor
    try:
        q_inv = mat_inv(q)
    except SingularMatrixError as e:
        raise WeightError(f"weight factor is singular: {e}") from e
    inner = op_mul(op_mul(DiffOp.mult(q), formal_star(d)), DiffOp.mult(q_inv))
    return KernelConjugator(weight.kernel.log_derivative).conjugate(inner)


def ad_power(l, m, k: int):
    """Iterated commutator Ad_l^k(m), Ad_a(b) = ab - ba; works for DiffOp and ShiftOp."""
    if k < 1:
        raise ValueError("k must be at least 1")
    if type(l) is not type(m):
        raise ShapeMismatchError("commutator of different kinds of operators")
    out = m
    for _ in range(k):
        out = l * out - out * l
    return out


@dataclass(frozen=True)
class FiltrationCheck:
    ok: bool
    order: int | None = None
    entry: tuple[int, int] | None = None

    def __bool__(self) -> bool:
        return self.ok


def is_degree_filtration_preserving(d: DiffOp) -> FiltrationCheck:
    """True iff every A_j is polynomial of degree at most j."""
    for j, aj in enumerate(d.coeffs):
        for r, row in enumerate(aj.rows):
            for c, f in enumerate(row):
                if not is_polynomial(f) or degree(f) > j:
                    return FiltrationCheck(False, j, (r, c))
    return FiltrationCheck(True)


def filtration_by_monomials(d: DiffOp, k_max: int | None = None) -> bool:
    """deg(x^k . D) <= k (as polynomials) for all k <= k_max."""
    if k_max is None:
        k_max = 2 * max(d.order, 0) + 2
    n = d.shape[0]
    for k in range(k_max + 1):
        image = op_apply(MatRF.scalar(X**k, n), d)
        for f in image.entries():
            if not is_polynomial(f) or degree(f) > k:
                return False
    return True


def max_coefficient_degree(d: DiffOp) -> int:
    return max((c.max_degree() for c in d.coeffs if not c.is_zero()), default=0)


def is_polynomial_operator(d: DiffOp) -> bool:
    return all(c.is_polynomial() for c in d.coeffs)


def scalar_poly_in(d: DiffOp, coeffs: Sequence) -> DiffOp:
    """p(D) for a polynomial p with ascending constant coefficients."""
    n = d.shape[0]
    out = DiffOp.zero(n)
    power = DiffOp.identity(n)
    for k, c in enumerate(coeffs):
        if k:
            power = op_mul(power, d)
        out = out + power * rf(c)
    return out


def apply_poly(p: MatPoly, d: DiffOp) -> MatPoly:
    """P.D for a matrix polynomial P; raises if the image is not polynomial."""
    image = op_apply(p.to_matrf(), d)
    if not image.is_polynomial():
        raise ShapeMismatchError("operator maps a polynomial outside the polynomials")
    return image.to_matpoly()


def random_operator(rng: random.Random, size: int, order: int, bound: int = 5,
                    complex_entries: bool = False) -> DiffOp:
    """Degree-filtration-preserving operator with small random coefficients, deg A_j <= j."""
    def scalar():
        re = Fraction(rng.randint(-bound, bound), rng.randint(1, bound))
        im = Fraction(rng.randint(-bound, bound), rng.randint(1, bound)) if complex_entries else 0
        return crat(re, im)

    coeffs = []
    for j in range(order + 1):
        coeffs.append(MatRF(tuple(
            tuple(poly_from_coeffs([scalar() for _ in range(j + 1)]) for _ in range(size))
            for _ in range(size)
        )))
    return DiffOp.of(coeffs, (size, size))

"""The discrete side: shift operators in n, eigenvalue matrices Lambda(n) and D(W) membership.

A shift operator M = sum_k M_k(n) S^k acts on a sequence by (M.P)(n) = sum_k M_k(n) P(n+k)
with P(negative) = 0. Coefficients are tabulated on a finite window n = 0..n_max; products
and commutators shrink the window and every result carries the window it is valid on.
The generalized Fourier map sends a differential operator D to the shift operator M with
M.P = P.D; on D(W) it is the eigenvalue matrix Lambda(n).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Callable, Mapping, Sequence

from sympy.functions.combinatorial.numbers import stirling
from sympy.polys.domains import QQ_I

from mopcheck.errors import (
    CertificateError,
    FiltrationError,
    ShapeMismatchError,
    WindowError,
)
from mopcheck.exact import CMat, MatPoly, crat, rref_solve
from mopcheck.opalg import (
    DiffOp,
    apply_poly,
    formal_dagger,
    is_degree_filtration_preserving,
    is_polynomial_operator,
    op_mul,
)
from mopcheck.pipeline import parallel_map
from mopcheck.weights import MOPSequence


def falling(n: int, j: int) -> int:
    out = 1
    for i in range(j):
        out *= n - i
    return out


# ---------------------------------------------------------------------------
# Eigenvalue matrices
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EigenvalueMatrix:
    """Lambda(n) = sum_j n(n-1)...(n-j+1) coeffs[j]; no trailing zero coefficient."""

    shape: tuple[int, int]
    coeffs: tuple[CMat, ...]

    @classmethod
    def of(cls, coeffs: Sequence[CMat], shape: tuple[int, int] | None = None) -> "EigenvalueMatrix":
        coeffs = list(coeffs)
        if shape is None:
            if not coeffs:
                raise ShapeMismatchError("shape required for the zero eigenvalue matrix")
            shape = coeffs[0].shape
        while coeffs and coeffs[-1].is_zero():
            coeffs.pop()
        return cls(shape, tuple(coeffs))

    @classmethod
    def constant(cls, m: CMat) -> "EigenvalueMatrix":
        return cls.of([m])

    @classmethod
    def from_values(cls, values: Sequence[CMat]) -> "EigenvalueMatrix":
        """Interpolate Lambda(0..k): coeffs[j] is the j-th forward difference at 0 over j!."""
        if not values:
            raise ShapeMismatchError("no values to interpolate")
        diffs = list(values)
        out = []
        for j in range(len(values)):
            out.append(diffs[0].scale(crat(Fraction(1, factorial(j)))))
            diffs = [b - a for a, b in zip(diffs, diffs[1:])]
        return cls.of(out, values[0].shape)

    @classmethod
    def from_function(cls, fn: Callable[[int], CMat], degree: int) -> "EigenvalueMatrix":
        return cls.from_values([fn(n) for n in range(degree + 1)])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def at(self, n: int) -> CMat:
        acc = CMat.zeros(*self.shape)
        for j, c in enumerate(self.coeffs):
            f = falling(n, j)
            if f:
                acc = acc + c.scale(f)
        return acc

    def to_monomial(self) -> list[CMat]:
        """Ascending coefficients in powers of n."""
        out = [CMat.zeros(*self.shape) for _ in self.coeffs]
        for j, c in enumerate(self.coeffs):
            for k in range(j + 1):
                s = int(stirling(j, k, kind=1, signed=True))
                if s:
                    out[k] = out[k] + c.scale(s)
        return out

    def entry_degree(self, i: int, k: int) -> int:
        top = -1
        for d, c in enumerate(self.to_monomial()):
            if c[i, k].x or c[i, k].y:
                top = d
        return top

    def __add__(self, other: "EigenvalueMatrix") -> "EigenvalueMatrix":
        n = max(len(self.coeffs), len(other.coeffs))
        zero = CMat.zeros(*self.shape)
        get = lambda e, j: e.coeffs[j] if j < len(e.coeffs) else zero
        return EigenvalueMatrix.of([get(self, j) + get(other, j) for j in range(n)], self.shape)

    def __neg__(self) -> "EigenvalueMatrix":
        return EigenvalueMatrix(self.shape, tuple(-c for c in self.coeffs))

    def __sub__(self, other: "EigenvalueMatrix") -> "EigenvalueMatrix":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, EigenvalueMatrix):
            if self.is_zero() or other.is_zero():
                return EigenvalueMatrix.of([], (self.shape[0], other.shape[1]))
            top = self.degree + other.degree
            return EigenvalueMatrix.from_values([self.at(n) * other.at(n) for n in range(top + 1)])
        return EigenvalueMatrix.of([c.scale(other) for c in self.coeffs], self.shape)


# ---------------------------------------------------------------------------
# Shift operators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ShiftOp:
    size: int
    n_max: int
    coeffs: tuple[tuple[int, tuple[CMat, ...]], ...]  # (offset k, M_k(0..n_max)), offsets ascending

    @classmethod
    def of(cls, size: int, n_max: int, mapping: Mapping[int, Sequence[CMat]]) -> "ShiftOp":
        zero = CMat.zeros(size)
        out = []
        for k in sorted(mapping):
            values = list(mapping[k])[: n_max + 1]
            if len(values) < n_max + 1:
                raise WindowError(f"offset {k} tabulated for {len(values)} of {n_max + 1} rows")
            values = [zero if n + k < 0 else v for n, v in enumerate(values)]
            if any(not v.is_zero() for v in values):
                out.append((k, tuple(values)))
        return cls(size, n_max, tuple(out))

    @classmethod
    def from_functions(cls, size: int, n_max: int,
                       mapping: Mapping[int, Callable[[int], CMat]]) -> "ShiftOp":
        return cls.of(size, n_max, {k: [fn(n) for n in range(n_max + 1)] for k, fn in mapping.items()})

    @classmethod
    def identity(cls, size: int, n_max: int) -> "ShiftOp":
        return cls.of(size, n_max, {0: [CMat.identity(size)] * (n_max + 1)})

    @classmethod
    def diagonal(cls, eigen: EigenvalueMatrix, n_max: int) -> "ShiftOp":
        return cls.of(eigen.shape[0], n_max, {0: [eigen.at(n) for n in range(n_max + 1)]})

    @property
    def offsets(self) -> list[int]:
        return [k for k, _ in self.coeffs]

    @property
    def band(self) -> tuple[int, int] | None:
        """(lowest, highest) offset carrying a nonzero coefficient."""
        if not self.coeffs:
            return None
        return self.coeffs[0][0], self.coeffs[-1][0]

    def at(self, k: int, n: int) -> CMat:
        if 0 <= n <= self.n_max:
            for off, values in self.coeffs:
                if off == k:
                    return values[n]
        return CMat.zeros(self.size)

    def is_zero(self) -> bool:
        return not self.coeffs

    def restrict(self, n_max: int) -> "ShiftOp":
        if n_max > self.n_max:
            raise WindowError(f"cannot widen a window from {self.n_max} to {n_max}")
        return ShiftOp.of(self.size, n_max, dict(self.coeffs))

    def _combine(self, other: "ShiftOp", sign: int) -> "ShiftOp":
        if self.size != other.size:
            raise ShapeMismatchError(f"shift operators of size {self.size} and {other.size}")
        n_max = min(self.n_max, other.n_max)
        mapping = {}
        for k in set(self.offsets) | set(other.offsets):
            mapping[k] = [self.at(k, n) + other.at(k, n).scale(sign) for n in range(n_max + 1)]
        return ShiftOp.of(self.size, n_max, mapping)

    def __add__(self, other: "ShiftOp") -> "ShiftOp":
        return self._combine(other, 1)

    def __sub__(self, other: "ShiftOp") -> "ShiftOp":
        return self._combine(other, -1)

    def __neg__(self) -> "ShiftOp":
        return ShiftOp(self.size, self.n_max, tuple((k, tuple(-v for v in vals)) for k, vals in self.coeffs))

    def __mul__(self, other: "ShiftOp") -> "ShiftOp":
        """(M1 M2)_(k+l)(n) = sum M1_k(n) M2_l(n+k); valid while n + k stays in M2's window."""
        if not isinstance(other, ShiftOp):
            return NotImplemented
        if self.size != other.size:
            raise ShapeMismatchError(f"shift operators of size {self.size} and {other.size}")
        reach = max([0] + self.offsets)
        n_max = min(self.n_max, other.n_max - reach)
        if n_max < 0:
            raise WindowError("product of shift operators has an empty window")
        mapping: dict[int, list[CMat]] = {}
        zero = CMat.zeros(self.size)
        for k, left in self.coeffs:
            for l, right in other.coeffs:
                row = mapping.setdefault(k + l, [zero] * (n_max + 1))
                for n in range(n_max + 1):
                    if n + k < 0 or left[n].is_zero():
                        continue
                    row[n] = row[n] + left[n] * right[n + k]
        return ShiftOp.of(self.size, n_max, mapping)

    def apply(self, values: Sequence[MatPoly]) -> list[MatPoly]:
        """(M.P)(n) for every n whose forward neighbours are supplied."""
        reach = max([0] + self.offsets)
        n_max = min(self.n_max, len(values) - 1 - reach)
        out = []
        for n in range(n_max + 1):
            acc = MatPoly.of([], values[0].shape)
            for k, coeffs in self.coeffs:
                if n + k >= 0 and not coeffs[n].is_zero():
                    acc = acc + coeffs[n] * values[n + k]
            out.append(acc)
        return out


def build_L(seq: MOPSequence) -> ShiftOp:
    """L = S + B(n) + C(n) S^-1 with L.P(n) = x P(n), checked on the window."""
    if seq.n_max < 1:
        raise WindowError("need at least P(0), P(1) to build the recurrence operator")
    n_max = seq.n_max - 1
    l_op = ShiftOp.of(seq.size, n_max, {
        1: [CMat.identity(seq.size)] * (n_max + 1),
        0: list(seq.recurrence_b),
        -1: list(seq.recurrence_c),
    })
    for n, image in enumerate(l_op.apply(seq.polys)):
        if not (image - seq.polys[n].shift(1)).is_zero():
            raise CertificateError("L.P(n) = x P(n)", f"n={n}")
    return l_op


# ---------------------------------------------------------------------------
# Fourier image and D(W) membership
# ---------------------------------------------------------------------------

def fourier_image(d: DiffOp) -> EigenvalueMatrix:
    """Lambda(n) = sum_j n(n-1)...(n-j+1) [x^j] A_j, the leading coefficient of x^n I . D."""
    check = is_degree_filtration_preserving(d)
    if not check:
        raise FiltrationError(f"dx^{check.order} coefficient entry {check.entry} has degree above {check.order}")
    return EigenvalueMatrix.of([aj.to_matpoly().coeff(j) for j, aj in enumerate(d.coeffs)], d.shape)


@dataclass(frozen=True)
class Membership:
    accepted: bool
    eigen: EigenvalueMatrix | None
    n_win: int
    proof: bool = False  # window exceeds the degree bound, so the check covers every n
    witness: int | None = None
    residual: MatPoly | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.accepted


def _degree_bound(d: DiffOp) -> int:
    excess = max((aj.max_degree() for aj in d.coeffs if not aj.is_zero()), default=0)
    return max(d.order, 0) + excess


def dw_membership(d: DiffOp, seq: MOPSequence, n_win: int | None = None) -> Membership:
    """Accept iff P(n).D = Lambda(n) P(n) exactly for n <= n_win."""
    n_win = seq.n_max if n_win is None else n_win
    if n_win > seq.n_max:
        raise WindowError(f"window {n_win} exceeds the sequence length {seq.n_max}")
    try:
        lam = fourier_image(d)
    except FiltrationError:
        lam = None

    def check(n: int) -> tuple[bool, MatPoly | None]:
        try:
            image = apply_poly(seq.polys[n], d)
        except ShapeMismatchError:
            return False, None
        if lam is None:
            return image.degree <= n, image
        residual = image - lam.at(n) * seq.polys[n]
        return residual.is_zero(), residual

    results = parallel_map(check, range(n_win + 1), label="membership")
    proof = n_win + 1 > _degree_bound(d)
    for n, (ok, residual) in enumerate(results):
        if not ok:
            return Membership(False, lam, n_win, proof, n, residual, "eigenvalue equation fails")
    if lam is None:
        return Membership(False, None, n_win, False, None, None, "not degree-filtration preserving")
    return Membership(True, lam, n_win, proof)


def expand_in_sequence(poly: MatPoly, seq: MOPSequence) -> dict[int, CMat]:
    """Coefficients C_j with poly = sum_j C_j P(j), by peeling leading terms."""
    out = {}
    r = poly
    while not r.is_zero():
        j = r.degree
        if j > seq.n_max:
            raise WindowError(f"degree {j} exceeds the sequence length {seq.n_max}")
        c = r.leading
        out[j] = c
        r = r - c * seq.polys[j]
    return out


def band_representation(d: DiffOp, seq: MOPSequence, n_win: int) -> ShiftOp:
    """The shift operator M with M.P = P.D, i.e. P(n).D = sum_j C(n, j) P(j), on n <= n_win."""
    if not is_polynomial_operator(d):
        raise ShapeMismatchError("band representation needs polynomial coefficients")
    excess = max([0] + [aj.max_degree() - j for j, aj in enumerate(d.coeffs) if not aj.is_zero()])
    if n_win + excess > seq.n_max:
        raise WindowError(f"window {n_win} needs P up to degree {n_win + excess}, have {seq.n_max}")
    rows = parallel_map(lambda n: expand_in_sequence(apply_poly(seq.polys[n], d), seq),
                        range(n_win + 1), label="band")
    zero = CMat.zeros(seq.size)
    mapping: dict[int, list[CMat]] = {}
    for n, row in enumerate(rows):
        for j, c in row.items():
            mapping.setdefault(j - n, [zero] * (n_win + 1))[n] = c
    return ShiftOp.of(seq.size, n_win, mapping)


@dataclass(frozen=True)
class FourierTest:
    status: str  # accept | reject | inconclusive
    k: int | None
    window: int


def left_fourier_test(m: ShiftOp, l_op: ShiftOp, k_max: int, min_rows: int = 2) -> FourierTest:
    """Smallest k with Ad_L^(k+1)(M) = 0 on the surviving window."""
    comm = m
    for k in range(k_max + 1):
        try:
            comm = l_op * comm - comm * l_op
        except WindowError:
            return FourierTest("inconclusive", None, -1)
        if comm.n_max + 1 < min_rows:
            return FourierTest("inconclusive", None, comm.n_max)
        if comm.is_zero():
            return FourierTest("accept", k, comm.n_max)
    return FourierTest("reject", None, comm.n_max)


# ---------------------------------------------------------------------------
# Adjoints on the discrete side
# ---------------------------------------------------------------------------

def discrete_dagger(m: ShiftOp, seq: MOPSequence) -> ShiftOp:
    """M^dagger = H(n) M^* H(n)^-1, with (A(n) S^k)^* = A(n-k)^* S^-k."""
    lowest = min([0] + m.offsets)
    n_max = min(seq.n_max, m.n_max) + lowest
    if n_max < 0:
        raise WindowError("adjoint has an empty window")
    norms = seq.norms
    inverses: dict[int, CMat] = {}
    zero = CMat.zeros(m.size)
    mapping = {}
    for k, values in m.coeffs:
        col = []
        for n in range(n_max + 1):
            src = n - k
            if src < 0:
                col.append(zero)
            else:
                if src not in inverses:
                    inverses[src] = norms[src].inv()
                col.append(norms[n] * values[src].H * inverses[src])
        mapping[-k] = col
    return ShiftOp.of(m.size, n_max, mapping)


def bilinear_identity(m: ShiftOp, seq: MOPSequence) -> list[tuple[int, int]]:
    """Pairs (n, j) violating <(M.P)(n), P(j)> = <P(n), (M^dagger.P)(j)>."""
    dag = discrete_dagger(m, seq)
    top = min(m.n_max, dag.n_max)
    h = seq.norms
    bad = []
    for n in range(top + 1):
        for j in range(top + 1):
            lhs = m.at(j - n, n) * h[j]
            rhs = h[n] * dag.at(n - j, j).H
            if lhs != rhs:
                bad.append((n, j))
    return bad


def eigen_dagger(lam: EigenvalueMatrix, seq: MOPSequence, n: int) -> CMat:
    """H(n) Lambda(n)^* H(n)^-1."""
    return seq.norms[n] * lam.at(n).H * seq.norms[n].inv()


def dagger_compatibility(d: DiffOp, seq: MOPSequence, n_win: int) -> bool:
    """Fourier image of the formal adjoint equals the discrete adjoint of the Fourier image."""
    left = discrete_dagger(band_representation(d, seq, n_win), seq)
    right = band_representation(formal_dagger(d, seq.weight), seq, left.n_max)
    return (left - right).is_zero()


def eigen_dagger_check(d: DiffOp, seq: MOPSequence, n_win: int) -> list[int]:
    """n <= n_win where Lambda_(D^dagger)(n) != H(n) Lambda_D(n)^* H(n)^-1."""
    lam = fourier_image(d)
    lam_dag = fourier_image(formal_dagger(d, seq.weight))
    return [n for n in range(n_win + 1) if lam_dag.at(n) != eigen_dagger(lam, seq, n)]


def multiplicativity(d1: DiffOp, d2: DiffOp, n_win: int) -> bool:
    """Lambda_(D1 D2) = Lambda_D1 Lambda_D2 on the window."""
    lam = fourier_image(op_mul(d1, d2))
    l1, l2 = fourier_image(d1), fourier_image(d2)
    return all(lam.at(n) == l1.at(n) * l2.at(n) for n in range(n_win + 1))


@dataclass(frozen=True)
class PositivityWitness:
    product_nonzero: bool
    eigen_nonzero: bool
    eigen_matches: bool

    def __bool__(self) -> bool:
        return self.product_nonzero and self.eigen_nonzero and self.eigen_matches


def positivity_witness(d: DiffOp, seq: MOPSequence, n_win: int) -> PositivityWitness:
    """D D^dagger != 0 with Lambda_(D D^dagger)(n) = Lambda_D H Lambda_D^* H^-1."""
    dag = formal_dagger(d, seq.weight)
    product = op_mul(d, dag)
    lam = fourier_image(d)
    lam_prod = fourier_image(product)
    values = [lam_prod.at(n) for n in range(n_win + 1)]
    expected = [lam.at(n) * eigen_dagger(lam, seq, n) for n in range(n_win + 1)]
    return PositivityWitness(
        product_nonzero=not product.is_zero(),
        eigen_nonzero=any(not v.is_zero() for v in values),
        eigen_matches=values == expected,
    )


# ---------------------------------------------------------------------------
# Inverse Fourier map
# ---------------------------------------------------------------------------

def operator_from_eigenvalue(lam: EigenvalueMatrix, seq: MOPSequence, order: int | None = None,
                             n_win: int | None = None) -> DiffOp:
    """The degree-filtration-preserving D of the given order with P(n).D = Lambda(n) P(n).

    The x^j coefficient of A_j is fixed by Lambda; the lower coefficients are solved for
    from the eigenvalue equations on n <= n_win, then membership is re-checked on the
    whole sequence.
    """
    order = lam.degree if order is None else order
    if lam.degree > order:
        raise FiltrationError(f"Lambda has degree {lam.degree} above the order {order}")
    size = seq.size
    n_win = min(seq.n_max, 2 * order + 2) if n_win is None else n_win
    units = [CMat.of([[1 if (p, q) == (r, c) else 0 for q in range(size)] for p in range(size)])
             for r in range(size) for c in range(size)]
    unknowns = [(j, k, u) for j in range(1, order + 1) for k in range(j) for u in range(len(units))]
    tops = [lam.coeffs[j] if j < len(lam.coeffs) else CMat.zeros(size) for j in range(order + 1)]

    rows, rhs = [], []
    for n in range(n_win + 1):
        derivs = [seq.polys[n]]
        for _ in range(order):
            derivs.append(derivs[-1].diff())
        known = -(lam.at(n) * seq.polys[n])
        for j in range(order + 1):
            known = known + derivs[j].shift(j) * tops[j]
        contribs = [derivs[j].shift(k) * units[u] for j, k, u in unknowns]
        for i in range(n + 1):
            for p in range(size):
                for q in range(size):
                    row = [c.coeff(i)[p, q] for c in contribs]
                    target = -known.coeff(i)[p, q]
                    if any(v.x or v.y for v in row) or target.x or target.y:
                        rows.append(row)
                        rhs.append(target)

    sol, rank = rref_solve(rows, rhs, QQ_I)
    if sol is None:
        raise CertificateError("inverse Fourier map", "no operator of this order has the given eigenvalue")
    if rank < len(unknowns):
        raise WindowError(f"window {n_win} determines only {rank} of {len(unknowns)} coefficients")

    coeffs = []
    for j in range(order + 1):
        parts = [CMat.zeros(size) for _ in range(j + 1)]
        parts[j] = tops[j]
        coeffs.append(parts)
    for value, (j, k, u) in zip(sol, unknowns):
        coeffs[j][k] = coeffs[j][k] + units[u].scale(value)
    d = DiffOp.of([MatPoly.of(parts, (size, size)).to_matrf() for parts in coeffs], (size, size))
    check = dw_membership(d, seq)
    if not check:
        raise CertificateError("inverse Fourier map", f"eigenvalue equation fails at n={check.witness}")
    return d

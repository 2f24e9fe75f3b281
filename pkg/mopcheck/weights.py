"""Weights W = f(x) Q(x), normalized moments, monic orthogonal polynomials.

All moments are divided by mu_0 = integral of f, so every quantity stays in
QQ_I. The kernel f is never integrated: its moments come from the Pearson
relation (q f)' = tau f, integrated by parts against x^m.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from sympy.polys.fields import FracElement

from mopcheck.errors import CertificateError, SingularHankelError, SingularMatrixError, WeightError
from mopcheck.exact import (
    FIELD,
    X,
    CMat,
    MatPoly,
    MatRF,
    crat,
    mat_det,
    rf,
    solve_constant,
)
from mopcheck.opalg import DiffOp, apply_poly, op_mul

KINDS = ("hermite", "laguerre", "jacobi")

# interior sample points used for the positivity spot check
_SAMPLES = {
    "hermite": ["-2", "-1", "0", "1/2", "3"],
    "laguerre": ["1/4", "1/2", "1", "2", "5"],
    "jacobi": ["-3/4", "-1/3", "0", "1/3", "3/4"],
}


# ---------------------------------------------------------------------------
# Scalar kernels
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScalarKernel:
    kind: str
    a: Fraction = Fraction(0)  # Jacobi exponent of (1-x)
    b: Fraction = Fraction(0)  # Laguerre exponent of x, Jacobi exponent of (1+x)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise WeightError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "laguerre" and self.b <= -1:
            raise WeightError(f"Laguerre kernel needs b > -1, got {self.b}")
        if self.kind == "jacobi" and (self.a <= -1 or self.b <= -1):
            raise WeightError(f"Jacobi kernel needs a, b > -1, got a={self.a}, b={self.b}")

    @property
    def support(self) -> tuple[Fraction | None, Fraction | None]:
        """Finite endpoints, None for an infinite one."""
        if self.kind == "hermite":
            return None, None
        if self.kind == "laguerre":
            return Fraction(0), None
        return Fraction(-1), Fraction(1)

    @property
    def finite_endpoints(self) -> list[Fraction]:
        return [e for e in self.support if e is not None]

    @property
    def log_derivative(self) -> FracElement:
        """s = f'/f."""
        if self.kind == "hermite":
            return -2 * X
        if self.kind == "laguerre":
            return rf(crat(self.b)) / X - 1
        return -rf(crat(self.a)) / (1 - X) + rf(crat(self.b)) / (1 + X)

    def pearson_pair(self) -> tuple[FracElement, FracElement]:
        """(q, tau) with (q f)' = tau f; the classical operator is dx^2 q + dx tau."""
        if self.kind == "hermite":
            return FIELD.one, -2 * X
        if self.kind == "laguerre":
            return X, rf(crat(self.b + 1)) - X
        a, b = rf(crat(self.a)), rf(crat(self.b))
        return 1 - X**2, b - a - (a + b + 2) * X

    def describe(self) -> str:
        if self.kind == "hermite":
            return "e^(-x^2)"
        if self.kind == "laguerre":
            return f"x^({self.b})*e^(-x)"
        return f"(1-x)^({self.a})*(1+x)^({self.b})"


def classical_kernel(kind: str, a=0, b=0) -> tuple[ScalarKernel, DiffOp]:
    """Kernel plus its classical second-order operator dx^2 q + dx tau."""
    kernel = ScalarKernel(kind, Fraction(a), Fraction(b))
    q, tau = kernel.pearson_pair()
    op = DiffOp.of([MatRF.zeros(1), MatRF(((tau,),)), MatRF(((q,),))], (1, 1))
    return kernel, op


def pearson_moments(kernel: ScalarKernel, m_max: int) -> list:
    """mu_m / mu_0 for m = 0..m_max, from  integral x^m tau f = -m integral x^(m-1) q f."""
    mu = [crat(1)]
    if m_max < 1:
        return mu[: m_max + 1]
    if kernel.kind == "hermite":
        # -2 mu_{m+1} = -m mu_{m-1}
        mu.append(crat(0))
        for m in range(1, m_max):
            mu.append(mu[m - 1] * crat(Fraction(m, 2)))
    elif kernel.kind == "laguerre":
        # (b+1) mu_m - mu_{m+1} = -m mu_m
        for m in range(m_max):
            mu.append(mu[m] * crat(kernel.b + 1 + m))
    else:
        a, b = kernel.a, kernel.b
        for m in range(m_max):
            prev = mu[m - 1] if m else crat(0)
            mu.append((mu[m] * crat(b - a) + prev * crat(m)) / crat(a + b + 2 + m))
    return mu


# ---------------------------------------------------------------------------
# Weights
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Weight:
    kernel: ScalarKernel
    factor: MatRF  # polynomial Q(x)
    name: str = ""

    @property
    def size(self) -> int:
        return self.factor.shape[0]

    @classmethod
    def scalar(cls, kernel: ScalarKernel, name: str = "") -> "Weight":
        return cls(kernel, MatRF.identity(1), name or kernel.kind)

    def factor_coeffs(self) -> list[CMat]:
        return list(self.factor.to_matpoly().coeffs)

    def validate(self) -> "Weight":
        q = self.factor
        if q.shape[0] != q.shape[1]:
            raise WeightError("weight factor must be square")
        if not q.is_polynomial():
            raise WeightError("weight factor must have polynomial entries")
        if q.H != q:
            raise WeightError("weight factor is not Hermitian for real x")
        if not mat_det(q):
            raise WeightError("weight factor has identically zero determinant")
        for point in _SAMPLES[self.kernel.kind]:
            if not q.evaluate(Fraction(point)).is_positive_definite():
                raise WeightError(f"weight factor is not positive definite at x={point}")
        return self


def matrix_moments(weight: Weight, m_max: int) -> list[CMat]:
    """M_m / mu_0 = sum_k Q_k mu_(m+k)/mu_0."""
    qk = weight.factor_coeffs()
    mu = pearson_moments(weight.kernel, m_max + len(qk))
    out = []
    for m in range(m_max + 1):
        acc = CMat.zeros(weight.size)
        for k, c in enumerate(qk):
            acc = acc + c.scale(mu[m + k])
        out.append(acc)
    return out


def inner(moments: list[CMat], f: MatPoly, g: MatPoly) -> CMat:
    """<F, G>_W / mu_0 = sum_(a,b) F_a M_(a+b) G_b^*."""
    acc = CMat.zeros(f.shape[0], g.shape[0])
    if f.is_zero() or g.is_zero():
        return acc
    if f.degree + g.degree >= len(moments):
        raise WeightError("not enough moments for this inner product")
    for i, fa in enumerate(f.coeffs):
        if fa.is_zero():
            continue
        for j, gb in enumerate(g.coeffs):
            if gb.is_zero():
                continue
            acc = acc + fa * moments[i + j] * gb.H
    return acc


# ---------------------------------------------------------------------------
# Monic orthogonal polynomials
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MOPSequence:
    weight: Weight
    polys: tuple[MatPoly, ...]  # P(x, n), n = 0..n_max
    norms: tuple[CMat, ...]  # H(n) = <P(n), P(n)> / mu_0
    moments: tuple[CMat, ...]  # M_m / mu_0, m = 0..2 n_max
    recurrence_b: tuple[CMat, ...]  # B(n), n = 0..n_max-1
    recurrence_c: tuple[CMat, ...]  # C(n), n = 0..n_max-1; C(0) = 0

    @property
    def n_max(self) -> int:
        return len(self.polys) - 1

    @property
    def size(self) -> int:
        return self.weight.size

    def inner(self, f: MatPoly, g: MatPoly) -> CMat:
        return inner(list(self.moments), f, g)


def _block(rows: list[list[CMat]]) -> CMat:
    out = []
    for block_row in rows:
        for r in range(block_row[0].shape[0]):
            out.append(tuple(v for blk in block_row for v in blk.rows[r]))
    return CMat(tuple(out))


def _monic(moments: list[CMat], n: int, size: int) -> MatPoly:
    """P(n) = x^n I + sum_(k<n) c_k x^k with sum_k c_k M_(k+j) = -M_(n+j), j < n."""
    eye = CMat.identity(size)
    if n == 0:
        return MatPoly.constant(eye)
    # transposed block system: [M_(k+j)]^T c^T = -[M_(n+j)]^T
    hankel_t = _block([[moments[k + j].T for k in range(n)] for j in range(n)])
    rhs_t = _block([[-moments[n + j].T] for j in range(n)])
    try:
        sol = solve_constant(hankel_t, rhs_t)
    except SingularMatrixError as e:
        raise SingularHankelError(f"block Hankel matrix of size {n} is singular") from e
    coeffs = []
    for k in range(n):
        block = CMat(tuple(tuple(r) for r in sol.rows[k * size:(k + 1) * size]))
        coeffs.append(block.T)
    coeffs.append(eye)
    return MatPoly.of(coeffs, (size, size))


def _recurrence(polys: list[MatPoly], norms: list[CMat]) -> tuple[list[CMat], list[CMat]]:
    size = polys[0].shape[0]
    bs, cs = [], []
    for n in range(len(polys) - 1):
        below = polys[n].coeff(n - 1) if n else CMat.zeros(size)
        bs.append(below - polys[n + 1].coeff(n))
        cs.append(norms[n] * norms[n - 1].inv() if n else CMat.zeros(size))
    return bs, cs


def monic_sequence(weight: Weight, n_max: int) -> MOPSequence:
    """Exact monic P(0..n_max), norms and recurrence data by block-Hankel solves."""
    moments = matrix_moments(weight, 2 * n_max + 1)
    polys = [_monic(moments, n, weight.size) for n in range(n_max + 1)]
    norms = []
    for n, p in enumerate(polys):
        # <P(n), P(n)> = <P(n), x^n I> by orthogonality
        h = CMat.zeros(weight.size)
        for k, c in enumerate(p.coeffs):
            h = h + c * moments[k + n]
        if not h.is_positive_definite():
            raise WeightError(f"norm H({n}) is not positive definite")
        norms.append(h)
    bs, cs = _recurrence(polys, norms)
    return MOPSequence(weight, tuple(polys), tuple(norms), tuple(moments), tuple(bs), tuple(cs))


def recurrence_residual(seq: MOPSequence, n: int) -> MatPoly:
    """x P(n) - P(n+1) - B(n) P(n) - C(n) P(n-1)."""
    p = seq.polys
    out = p[n].shift(1) - p[n + 1] - seq.recurrence_b[n] * p[n]
    if n:
        out = out - seq.recurrence_c[n] * p[n - 1]
    return out


def recurrence_coeffs(seq: MOPSequence) -> tuple[list[CMat], list[CMat]]:
    """(B(n), C(n)) for n <= n_max - 1; the recurrence is checked exactly."""
    bs, cs = _recurrence(list(seq.polys), list(seq.norms))
    for n in range(seq.n_max):
        if not recurrence_residual(seq, n).is_zero():
            raise CertificateError("three-term recurrence", f"n={n}")
    return bs, cs


def orthogonality_defects(seq: MOPSequence, n_max: int | None = None) -> list[tuple[int, int]]:
    """Pairs m < n with <P(n), P(m)> != 0."""
    top = seq.n_max if n_max is None else n_max
    bad = []
    for n in range(top + 1):
        for m in range(n):
            if not seq.inner(seq.polys[n], seq.polys[m]).is_zero():
                bad.append((n, m))
    return bad


# ---------------------------------------------------------------------------
# Jacobi intertwiners
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Intertwiner:
    alpha: Fraction
    beta: Fraction
    t: DiffOp
    e: DiffOp  # classical operator for (alpha, beta)
    e_shifted: DiffOp  # classical operator for (alpha+1, beta+1)


def jacobi_intertwiner(alpha, beta) -> Intertwiner:
    """t = dx (1-x^2) + beta - alpha - (beta+alpha+2) x, with

        e_(alpha,beta) = dx t    and    e_(alpha+1,beta+1) - (beta+alpha+2) = t dx
    """
    alpha, beta = Fraction(alpha), Fraction(beta)
    kernel, e = classical_kernel("jacobi", alpha, beta)
    _, e_shifted = classical_kernel("jacobi", alpha + 1, beta + 1)
    q, tau = kernel.pearson_pair()
    t = DiffOp.of([MatRF(((tau,),)), MatRF(((q,),))], (1, 1))
    dx = DiffOp.dx(1)
    if op_mul(dx, t) != e:
        raise CertificateError("jacobi intertwiner e = dx t", f"alpha={alpha}, beta={beta}")
    if op_mul(t, dx) != e_shifted.plus_scalar(crat(-(alpha + beta + 2))):
        raise CertificateError("jacobi intertwiner t dx = e' - (alpha+beta+2)", f"alpha={alpha}, beta={beta}")
    return Intertwiner(alpha, beta, t, e, e_shifted)


def jacobi_shift_checks(alpha, beta, n_max: int = 5) -> dict[str, bool]:
    """Degree raising of t and degree lowering of dx on the two Jacobi families."""
    it = jacobi_intertwiner(alpha, beta)
    low = monic_sequence(Weight.scalar(ScalarKernel("jacobi", it.alpha, it.beta)), n_max + 1)
    high = monic_sequence(Weight.scalar(ScalarKernel("jacobi", it.alpha + 1, it.beta + 1)), n_max + 1)
    raises = True
    lowers = True
    for n in range(n_max + 1):
        image = apply_poly(high.polys[n], it.t)
        # j_(a+1,b+1)(n) . t is an eigenfunction of e of degree n+1
        raises &= image.degree == n + 1 and (image - low.polys[n + 1] * image.leading).is_zero()
        if n:
            lowered = apply_poly(low.polys[n], DiffOp.dx(1))
            lowers &= (lowered - high.polys[n - 1] * lowered.leading).is_zero()
    return {"t raises degree": raises, "dx lowers degree": lowers}

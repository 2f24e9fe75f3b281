"""Orthogonal systems in D(W), cyclic generators, the diagonalizing operator and the v_i.

Row operators u (1 x N) are solved for in left form u = sum_p c_p dx^p with c_p rows over
QQ_I(x); left multiplication by a rational function is then a plain rescaling of the c_p,
which is the freedom the normalization removes. Everything is converted back to the
right normal form before it leaves this module.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Sequence

from sympy.polys.fields import FracElement

from mopcheck.errors import CertificateError, InconclusiveError, ShapeMismatchError
from mopcheck.exact import (
    FIELD,
    FIELD_DOMAIN,
    ZERO,
    MatRF,
    c_is_zero,
    conj,
    constant_value,
    denominator_lcm,
    deriv,
    evaluate,
    is_constant,
    mat_det,
    nullspace,
    poly_coeffs,
    poly_gcd,
    rf,
    root_multiplicity,
    rref_solve,
)
from mopcheck.fourier import EigenvalueMatrix, dw_membership, fourier_image
from mopcheck.opalg import (
    DiffOp,
    KernelConjugator,
    formal_dagger,
    formal_star,
    from_left,
    op_mul,
    scalar_poly_in,
    to_left,
)
from mopcheck.pipeline import parallel_map
from mopcheck.weights import MOPSequence, ScalarKernel, Weight
from shared import telemetry


# ---------------------------------------------------------------------------
# Orthogonal systems
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OrthSystem:
    ops: tuple[DiffOp, ...]
    weight: Weight
    eigen: tuple[EigenvalueMatrix, ...]
    orders: tuple[int, ...]
    symmetric: tuple[bool, ...]
    failed_pairs: tuple[tuple[int, int], ...]  # (i, j), i != j, with V_i V_j != 0
    non_zero_divisor: bool
    central: bool | None  # None when no generators were supplied
    rank_bound: int

    @property
    def size(self) -> int:
        return self.weight.size

    @property
    def pairwise_zero(self) -> bool:
        return not self.failed_pairs

    @property
    def ok(self) -> bool:
        return all(self.symmetric) and self.pairwise_zero and self.non_zero_divisor

    def require(self) -> "OrthSystem":
        for i, sym in enumerate(self.symmetric):
            if not sym:
                raise CertificateError(f"V_{i + 1} is W-symmetric")
        if self.failed_pairs:
            i, j = self.failed_pairs[0]
            raise CertificateError("V_i V_j = 0", f"i={i + 1}, j={j + 1}")
        if not self.non_zero_divisor:
            raise CertificateError("sum of V_i is not a zero divisor", "det Lambda(n) vanishes on the window")
        return self


def _nilpotent(m) -> bool:
    power = m
    for _ in range(m.shape[0] - 1):
        power = power * m
    return power.is_zero()


def verify_orthogonal_system(ops: Sequence[DiffOp], seq: MOPSequence,
                             generators: Sequence[DiffOp] | None = None,
                             n_win: int | None = None) -> OrthSystem:
    """Certify W-symmetry, V_i V_j = 0 and a non-zero-divisor sum; centrality if generators given."""
    n_win = seq.n_max if n_win is None else n_win
    ops = tuple(ops)
    eigen = []
    for i, v in enumerate(ops):
        membership = dw_membership(v, seq, n_win)
        if not membership:
            raise CertificateError(f"V_{i + 1} in D(W)", f"{membership.reason} at n={membership.witness}")
        eigen.append(membership.eigen)

    symmetric = tuple(formal_dagger(v, seq.weight) == v for v in ops)
    failed = tuple(
        (i, j) for i in range(len(ops)) for j in range(len(ops))
        if i != j and not op_mul(ops[i], ops[j]).is_zero()
    )
    total = reduce(lambda a, b: a + b, ops)
    lam = fourier_image(total)
    non_zero_divisor = any(not c_is_zero(lam.at(n).det()) for n in range(n_win + 1))
    central = None
    if generators is not None:
        central = all((op_mul(total, g) - op_mul(g, total)).is_zero() for g in generators)
    rank_bound = sum(
        1 for e in eigen if any(not _nilpotent(e.at(n)) for n in range(n_win + 1))
    )
    telemetry.say(
        f"[structure] system of {len(ops)}: symmetric={all(symmetric)} pairwise_zero={not failed} "
        f"non_zero_divisor={non_zero_divisor} central={central}"
    )
    return OrthSystem(ops, seq.weight, tuple(eigen), tuple(v.order for v in ops), symmetric,
                      failed, non_zero_divisor, central, rank_bound)


# ---------------------------------------------------------------------------
# Cyclic generators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CyclicGenerator:
    index: int
    op: DiffOp  # 1 x N row operator
    order: int
    minimal: bool  # no nonzero solution exists one order lower


def _left_rows(op: DiffOp) -> list[list[FracElement]]:
    return [list(c.rows[0]) for c in to_left(op)]


def _annihilator_basis(others: Sequence[DiffOp], size: int, k: int) -> list[list[FracElement]]:
    """Basis of {(c_0..c_k) : (sum_p c_p dx^p) V = 0 for every V in others}."""
    n_cols = (k + 1) * size
    rows = []
    for v in others:
        lefts = [to_left(op_mul(DiffOp.dx(size) ** p, v)) for p in range(k + 1)]
        depth = max(len(l) for l in lefts)
        for q in range(depth):
            for col in range(size):
                row = []
                for p in range(k + 1):
                    for r in range(size):
                        row.append(lefts[p][q][r, col] if q < len(lefts[p]) else FIELD.zero)
                if any(row):
                    rows.append(row)
    return nullspace(rows, n_cols, FIELD_DOMAIN)


def _normalize(blocks: list[list[FracElement]]) -> list[list[FracElement]]:
    """Clear denominators, divide by the content and make the leading row's first entry monic."""
    flat = [f for row in blocks for f in row if f]
    den = denominator_lcm(flat)
    scaled = [[f * den for f in row] for row in blocks]
    content = reduce(poly_gcd, [f for row in scaled for f in row if f])
    scaled = [[f / content for f in row] for row in scaled]
    lead = next(f for f in scaled[-1] if f)
    lc = poly_coeffs(lead)[-1]
    return [[f / FIELD(lc) for f in row] for row in scaled]


def cyclic_generator(system: OrthSystem, i: int, order_cap: int, min_order: int = 0) -> CyclicGenerator:
    """Lowest-order row operator u, searching orders min_order..order_cap, with u V_j = 0 for every j != i."""
    if order_cap < 0 or min_order < 0:
        raise ValueError("order_cap and min_order must be nonnegative")
    size = system.size
    others = [v for j, v in enumerate(system.ops) if j != i]
    last_empty = None
    for k in range(min_order, order_cap + 1):
        basis = _annihilator_basis(others, size, k)
        if not basis:
            last_empty = k
            continue
        # solutions of order k - 1 are solutions of order k, so one empty order below settles it
        minimal = k == 0 or last_empty == k - 1 or not _annihilator_basis(others, size, k - 1)
        # a vector of true order k; at a minimal order every vector qualifies
        vec = next(b for b in basis if any(b[k * size:]))
        blocks = [vec[p * size:(p + 1) * size] for p in range(k + 1)]
        blocks = _normalize(blocks)
        u = from_left([MatRF((tuple(row),)) for row in blocks], (1, size))
        for j, v in enumerate(system.ops):
            if j != i and not op_mul(u, v).is_zero():
                raise CertificateError(f"u_{i + 1} V_{j + 1} = 0")
        telemetry.say(f"[structure] u_{i + 1} found at order {k} ({len(basis)} solution(s))")
        return CyclicGenerator(i, u, k, minimal)
    raise InconclusiveError(f"no generator for index {i + 1} up to order {order_cap}")


def left_ratio(u: DiffOp, w: DiffOp) -> FracElement | None:
    """h with u = h w for a rational function h, or None."""
    if u.shape != w.shape:
        raise ShapeMismatchError(f"{u.shape} vs {w.shape}")
    lu, lw = _left_rows(u), _left_rows(w)
    if len(lu) != len(lw):
        return None
    h = None
    for ru, rw in zip(lu, lw):
        for a, b in zip(ru, rw):
            if not b:
                if a:
                    return None
                continue
            if h is None:
                h = a / b
            elif a != h * b:
                return None
    return h


def build_U(rows: Sequence[DiffOp]) -> tuple[DiffOp, MatRF]:
    """Stack the generators; U(x) is the matrix of their leading coefficient rows."""
    u_op = DiffOp.vstack(rows)
    u_matrix = MatRF(tuple(r.leading.rows[0] for r in rows))
    if not mat_det(u_matrix):
        raise CertificateError("det U(x) != 0", "determinant vanishes identically")
    return u_op, u_matrix


# ---------------------------------------------------------------------------
# Diagonalization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KernelTracked:
    """f(x) * rational(x) for the Pearson kernel f."""

    kernel: ScalarKernel
    rational: FracElement

    @property
    def log_derivative(self) -> FracElement:
        return self.kernel.log_derivative + deriv(self.rational) / self.rational


def _order_at(g: FracElement, root) -> int:
    return root_multiplicity(g, root) - root_multiplicity(FIELD.new(g.denom), root)


def effective_kernel(kt: KernelTracked) -> dict[str, Fraction]:
    """Exponent of each kernel factor once the rational part is absorbed."""
    k = kt.kernel
    if k.kind == "hermite":
        return {}
    if k.kind == "laguerre":
        return {"x": k.b + _order_at(kt.rational, 0)}
    return {"1-x": k.a + _order_at(kt.rational, 1), "1+x": k.b + _order_at(kt.rational, -1)}


def diagonalize_weight(u_matrix: MatRF, weight: Weight) -> list[KernelTracked]:
    """U W U^* = f diag(r_1..r_N); off-diagonal entries must vanish identically."""
    product = u_matrix * weight.factor * u_matrix.H
    n = product.shape[0]
    off = [(i, k) for i in range(n) for k in range(n) if i != k and product[i, k]]
    if off:
        raise CertificateError("U W U^* is diagonal", f"nonzero entries at {off}")
    return [KernelTracked(weight.kernel, product[i, i]) for i in range(n)]


# ---------------------------------------------------------------------------
# Scalar operators v_i
# ---------------------------------------------------------------------------

def compute_vi(u: DiffOp, v_op: DiffOp) -> DiffOp:
    """The scalar v with v u = u V."""
    target = op_mul(u, v_op)
    if target.is_zero():
        return DiffOp.zero(1)
    m = target.order - u.order
    if m < 0:
        raise CertificateError("v u = u V", "u V has lower order than u")
    size = u.shape[1]
    lefts = [to_left(op_mul(DiffOp.dx(1) ** p, u)) for p in range(m + 1)]
    goal = to_left(target)
    rows, rhs = [], []
    for q in range(len(goal)):
        for col in range(size):
            rows.append([l[q][0, col] if q < len(l) else FIELD.zero for l in lefts])
            rhs.append(goal[q][0, col])
    sol, _ = rref_solve(rows, rhs, FIELD_DOMAIN)
    if sol is None:
        raise CertificateError("v u = u V", "no scalar operator solves it")
    v = from_left([MatRF(((e,),)) for e in sol], (1, 1))
    if op_mul(v, u) != target:
        raise CertificateError("v u = u V", "residual after solve")
    return v


def express_in_classical(v: DiffOp, d: DiffOp) -> list:
    """Ascending constants p_k with v = sum_k p_k d^k."""
    if d.order < 1:
        raise ValueError("the classical operator must have positive order")
    found = {}
    r = v
    while not r.is_zero():
        if r.order % d.order:
            raise CertificateError("v = p(d)", f"order {r.order} is not a multiple of {d.order}")
        k = r.order // d.order
        ratio = r.leading[0, 0] / d.leading[0, 0] ** k
        if not is_constant(ratio):
            raise CertificateError("v = p(d)", f"leading ratio {ratio} is not constant")
        c = constant_value(ratio)
        found[k] = c
        r = r - (d ** k) * rf(c)
    top = max(found, default=-1)
    coeffs = [found.get(k, ZERO) for k in range(top + 1)]
    if scalar_poly_in(d, coeffs) != v:
        raise CertificateError("v = p(d)", "expansion does not reproduce v")
    return coeffs


@dataclass(frozen=True)
class SymmetryChecks:
    commutes: bool  # v b = b v^*
    ode_residual: FracElement
    endpoints: dict[str, bool]  # finite endpoint -> leading coefficient of v vanishes there

    @property
    def ok(self) -> bool:
        return self.commutes and not self.ode_residual and all(self.endpoints.values())


def adjoint_symmetry_checks(u: DiffOp, v: DiffOp, weight: Weight) -> SymmetryChecks:
    """With b = u W u^* = f beta and r = f rho its leading coefficient:

    v b = b v^*  <=>  (f^-1 v f) beta = beta v^*, and the next-to-leading order gives
    (v_(m-1) + (-1)^m conj v_(m-1)) r + (2l - m) v_m' r - m r' v_m = 0 with r' = f (rho' + s rho).
    """
    s = weight.kernel.log_derivative
    conjugator = KernelConjugator(s)
    beta = op_mul(op_mul(conjugator.unconjugate(u), DiffOp.mult(weight.factor)), formal_star(u))
    commutes = op_mul(conjugator.unconjugate(v), beta) == op_mul(beta, formal_star(v))

    c = u.leading
    rho = (c * weight.factor * c.H)[0, 0]
    m, l = v.order, u.order
    endpoints = {}
    if m < 1:
        return SymmetryChecks(commutes, FIELD.zero, endpoints)
    vm = v.coeff(m)[0, 0]
    vm1 = v.coeff(m - 1)[0, 0]
    residual = ((vm1 + (-1) ** m * conj(vm1)) * rho + (2 * l - m) * deriv(vm) * rho
                - m * (deriv(rho) + s * rho) * vm)
    for e in weight.kernel.finite_endpoints:
        try:
            endpoints[str(e)] = c_is_zero(evaluate(vm, e))
        except ZeroDivisionError:
            endpoints[str(e)] = False
    return SymmetryChecks(commutes, residual, endpoints)


# ---------------------------------------------------------------------------
# Full pipeline
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CyclicData:
    generators: tuple[CyclicGenerator, ...]
    u_op: DiffOp
    u_matrix: MatRF
    vs: tuple[DiffOp, ...]
    diagonal: tuple[KernelTracked, ...]


def cyclic_data(system: OrthSystem, order_cap: int) -> CyclicData:
    """Generators, U, v_i and U W U^* for a certified system; indices run in parallel."""
    count = len(system.ops)
    gens = parallel_map(lambda i: cyclic_generator(system, i, order_cap), range(count), label="generators")
    u_op, u_matrix = build_U([g.op for g in gens])
    vs = parallel_map(lambda i: compute_vi(gens[i].op, system.ops[i]), range(count), label="v_i")
    diagonal = diagonalize_weight(u_matrix, system.weight)
    return CyclicData(tuple(gens), u_op, u_matrix, tuple(vs), tuple(diagonal))

"""Exceptional degrees of scalar operators and verification of supplied Darboux data."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from sympy.polys.domains import QQ_I

from mopcheck.errors import FiltrationError, ShapeMismatchError
from mopcheck.exact import (
    FIELD,
    X,
    CMat,
    MatRF,
    denominator_lcm,
    is_polynomial,
    numer_denom_degrees,
    nullspace,
    poly_coeffs,
    c_is_zero,
)
from mopcheck.fourier import falling
from mopcheck.opalg import DiffOp, op_apply, op_mul, scalar_poly_in
from mopcheck.pipeline import parallel_map
from mopcheck.weights import MOPSequence


# ---------------------------------------------------------------------------
# Exceptional degrees
# ---------------------------------------------------------------------------

def _leading_ratios(d: DiffOp) -> list:
    """lim x^-j a_j(x) for each coefficient a_j; raises if some a_j grows faster than x^j."""
    out = []
    for j, c in enumerate(d.coeffs):
        a = c[0, 0]
        if not a:
            out.append(FIELD.zero)
            continue
        num, den = numer_denom_degrees(a)
        if num - den > j:
            raise FiltrationError(f"dx^{j} coefficient grows like x^{num - den}")
        out.append(FIELD(a.numer.LC / a.denom.LC) if num - den == j else FIELD.zero)
    return out


def eigenvalue_for_degree(d: DiffOp, n: int) -> object:
    """The only possible eigenvalue of a degree-n polynomial eigenfunction."""
    ratios = _leading_ratios(d)
    return sum((falling(n, j) * r for j, r in enumerate(ratios)), FIELD.zero)


def _monomial_images(d: DiffOp, n: int, q) -> list:
    """(x^k).d * q for k <= n, with q clearing the coefficient denominators."""
    return parallel_map(lambda k: op_apply(MatRF.scalar(X**k, 1), d)[0, 0] * q, range(n + 1), label="monomials")


def _solvable(images: list, q, lam, n: int) -> bool:
    columns = []
    for k in range(n + 1):
        g = images[k] - lam * X**k * q
        if not is_polynomial(g):
            raise ShapeMismatchError("denominators not cleared")
        columns.append(poly_coeffs(g))
    depth = max((len(c) for c in columns), default=0)
    rows = [[c[i] if i < len(c) else QQ_I.zero for c in columns] for i in range(depth)]
    rows = [r for r in rows if any(not c_is_zero(v) for v in r)]
    basis = nullspace(rows, n + 1, QQ_I)
    return any(not c_is_zero(v[n]) for v in basis)


def has_eigenfunction(d: DiffOp, n: int) -> bool:
    """True iff some polynomial of degree exactly n satisfies F.d = lambda F."""
    q = denominator_lcm([c[0, 0] for c in d.coeffs])
    return _solvable(_monomial_images(d, n, q), q, eigenvalue_for_degree(d, n), n)


def exceptional_degrees(d: DiffOp, n_max: int) -> list[int]:
    """Degrees n <= n_max with no polynomial eigenfunction of degree n."""
    if d.shape != (1, 1):
        raise ShapeMismatchError("exceptional degrees are defined for scalar operators")
    q = denominator_lcm([c[0, 0] for c in d.coeffs])
    images = _monomial_images(d, n_max, q)
    found = parallel_map(lambda n: _solvable(images, q, eigenvalue_for_degree(d, n), n),
                         range(n_max + 1), label="exceptional")
    return [n for n, ok in enumerate(found) if not ok]


# ---------------------------------------------------------------------------
# Darboux data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DarbouxData:
    """Any subset of the data the verification understands; missing pieces are skipped."""

    # conjugacy h d = d~ h
    h: DiffOp | None = None
    d: DiffOp | None = None
    d_tilde: DiffOp | None = None
    # factorization T T~ = diag(p_i(d_i) q(p_i(d_i))), T~ E_ii T = V_i q(V_i)
    t: DiffOp | None = None
    t_tilde: DiffOp | None = None
    targets: tuple[DiffOp, ...] = ()
    p: tuple[tuple, ...] = ()
    q: tuple = ()
    # intertwining U D = diag(targets) U, one entry per D
    u_op: DiffOp | None = None
    intertwining: tuple[tuple[str, DiffOp, tuple[DiffOp, ...]], ...] = ()
    # sequences C(n) P~(n + shift) = P(n) . T F
    seq: MOPSequence | None = None
    seq_tilde: MOPSequence | None = None
    c_of_n: Callable[[int], CMat] | None = None
    shift: int = 0
    f_factor: MatRF | None = None
    n_win: int = 6


@dataclass(frozen=True)
class DarbouxCheck:
    name: str
    passed: bool
    detail: str = ""


def diagonal_operator(entries: Sequence[DiffOp]) -> DiffOp:
    n = len(entries)
    zero = DiffOp.zero(1)
    return DiffOp.from_grid([[entries[i] if i == k else zero for k in range(n)] for i in range(n)])


def _conjugacy(data: DarbouxData) -> DarbouxCheck:
    if op_mul(data.h, data.d) == op_mul(data.d_tilde, data.h):
        return DarbouxCheck("h d = d~ h", True)
    if op_mul(data.h, data.d_tilde) == op_mul(data.d, data.h):
        return DarbouxCheck("h d~ = d h", True, "holds with d and d~ exchanged")
    return DarbouxCheck("h d = d~ h", False, "neither direction holds")


def _factorization(data: DarbouxData, ops: Sequence[DiffOp]) -> list[DarbouxCheck]:
    out = []
    blocks = []
    for d_i, p_i in zip(data.targets, data.p):
        pd = scalar_poly_in(d_i, p_i)
        blocks.append(op_mul(pd, scalar_poly_in(pd, data.q)))
    product = op_mul(data.t, data.t_tilde)
    out.append(DarbouxCheck("T T~ = diag(p_i(d_i) q(p_i(d_i)))", product == diagonal_operator(blocks)))
    size = data.t.shape[0]
    for i, v in enumerate(ops):
        unit = MatRF(tuple(
            tuple(FIELD.one if (r, c) == (i, i) else FIELD.zero for c in range(size)) for r in range(size)
        ))
        lhs = op_mul(op_mul(data.t_tilde, DiffOp.mult(unit)), data.t)
        rhs = op_mul(v, scalar_poly_in(v, data.q))
        out.append(DarbouxCheck(f"T~ E_{i + 1}{i + 1} T = V_{i + 1} q(V_{i + 1})", lhs == rhs))
    return out


def _intertwining(data: DarbouxData) -> list[DarbouxCheck]:
    out = []
    for name, op, targets in data.intertwining:
        lhs = op_mul(data.u_op, op)
        rhs = op_mul(diagonal_operator(targets), data.u_op)
        out.append(DarbouxCheck(f"U {name} = diag(...) U", lhs == rhs))
    return out


def _sequences(data: DarbouxData) -> DarbouxCheck:
    seq, seq_t = data.seq, data.seq_tilde
    f_factor = data.f_factor if data.f_factor is not None else MatRF.identity(seq.size)
    top = min(data.n_win, seq.n_max, seq_t.n_max - data.shift)
    for n in range(top + 1):
        rhs = op_apply(seq.polys[n].to_matrf(), data.t) * f_factor
        k = n + data.shift
        if k < 0:
            lhs = MatRF.zeros(*rhs.shape)
        else:
            lhs = (data.c_of_n(n) * seq_t.polys[k]).to_matrf()
        if lhs != rhs:
            return DarbouxCheck("C(n) P~(n) = P(n) . T F", False, f"n={n}")
    return DarbouxCheck("C(n) P~(n) = P(n) . T F", True, f"n <= {top}")


def darboux_verify(data: DarbouxData, ops: Sequence[DiffOp] = ()) -> list[DarbouxCheck]:
    """Check every identity the supplied data allows; ops are the V_i of the system."""
    out = []
    if data.h is not None and data.d is not None and data.d_tilde is not None:
        out.append(_conjugacy(data))
    if data.t is not None and data.t_tilde is not None and data.targets:
        out.extend(_factorization(data, ops))
    if data.u_op is not None and data.intertwining:
        out.extend(_intertwining(data))
    if data.seq is not None and data.seq_tilde is not None and data.c_of_n is not None and data.t is not None:
        out.append(_sequences(data))
    return out

"""Built-in weights, classical operators and the three worked 2x2 examples.

Operators are written in the DSL and parsed with the example's parameters; expected
eigenvalues are plain functions of n interpolated into EigenvalueMatrix values. Where a
tabulated value is wrong the registry carries the corrected value and a note saying so.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping

from sympy.polys.fields import FracElement

from mopcheck.config import PARAM_BOUND
from mopcheck.darboux import DarbouxData
from mopcheck.errors import SpecSemanticError, WeightError
from mopcheck.exact import X, CMat, MatRF, rf
from mopcheck.fourier import EigenvalueMatrix, operator_from_eigenvalue
from mopcheck.opalg import DiffOp, op_mul, scalar_poly_in
from mopcheck.specio import parse_matrix, parse_operator, parse_row_operator
from mopcheck.weights import ScalarKernel, Weight, classical_kernel, jacobi_intertwiner, monic_sequence

# name -> (kernel kind, required parameters)
WEIGHTS: dict[str, tuple[str, tuple[str, ...]]] = {
    "hermite": ("hermite", ()),
    "laguerre": ("laguerre", ("b",)),
    "jacobi": ("jacobi", ("a", "b")),
    "gegenbauer": ("jacobi", ("r",)),
    "hermite-2x2": ("hermite", ("a",)),
    "laguerre-2x2": ("laguerre", ("a", "b")),
    "jacobi-2x2": ("jacobi", ("a", "r")),
}

EXAMPLES = ("hermite", "laguerre", "jacobi")

EXCEPTIONAL_OPERATORS = {
    # X_2 Hermite operator, exceptional degrees {1, 2}
    "exceptional-x2": "dx^2 - dx*(2*x + 8*x/(1+2*x^2))",
    # the commonly quoted variant; it also loses degree 3
    "exceptional-x2-quoted": "dx^2 - dx*(2*x + 4*x/(1+2*x^2))",
}

HERMITE_FACTOR = "[[1+a^2*x^2, a*x],[a*x, 1]]"
LAGUERRE_FACTOR = "[[1+a^2*x^2, a*x],[a*x, 1]]"
JACOBI_FACTOR = "[[a*(x^2-1)+r, -r*x],[-r*x, (r-a)*(x^2-1)+r]]"


def _params(name: str, params: Mapping[str, object]) -> dict[str, Fraction]:
    needed = WEIGHTS[name][1]
    missing = [p for p in needed if p not in params]
    if missing:
        raise SpecSemanticError(f"weight {name!r} needs parameter(s) {', '.join(missing)}")
    return {p: Fraction(params[p]) for p in needed}


def build_weight(name: str, params: Mapping[str, object] | None = None) -> Weight:
    """A registered weight at the given parameters; raises WeightError on bad values."""
    if name not in WEIGHTS:
        raise SpecSemanticError(f"unknown weight {name!r}; known: {', '.join(sorted(WEIGHTS))}")
    p = _params(name, params or {})
    if name == "hermite":
        return Weight.scalar(ScalarKernel("hermite"), name)
    if name == "laguerre":
        return Weight.scalar(ScalarKernel("laguerre", b=p["b"]), name)
    if name == "jacobi":
        return Weight.scalar(ScalarKernel("jacobi", p["a"], p["b"]), name)
    if name == "gegenbauer":
        half = p["r"] / 2
        return Weight.scalar(ScalarKernel("jacobi", half, half), name)
    if name == "hermite-2x2":
        if not p["a"]:
            raise WeightError("hermite-2x2 needs a != 0")
        return Weight(ScalarKernel("hermite"), parse_matrix(HERMITE_FACTOR, p), name).validate()
    if name == "laguerre-2x2":
        if not p["a"]:
            raise WeightError("laguerre-2x2 needs a != 0")
        kernel = ScalarKernel("laguerre", b=p["b"])
        return Weight(kernel, parse_matrix(LAGUERRE_FACTOR, p), name).validate()
    if not 0 < p["a"] < p["r"]:
        raise WeightError(f"jacobi-2x2 needs 0 < a < r, got a={p['a']}, r={p['r']}")
    exponent = p["r"] / 2 - 1
    kernel = ScalarKernel("jacobi", exponent, exponent)
    return Weight(kernel, parse_matrix(JACOBI_FACTOR, p), name).validate()


def classical_operator(name: str, params: Mapping[str, object] | None = None) -> DiffOp:
    """The second-order operator of a scalar registered weight."""
    weight = build_weight(name, params)
    if weight.size != 1:
        raise SpecSemanticError(f"{name!r} is not a scalar weight")
    k = weight.kernel
    return classical_kernel(k.kind, k.a, k.b)[1]


def _eigen(fn: Callable[[int], list[list]], degree: int = 6) -> EigenvalueMatrix:
    return EigenvalueMatrix.from_function(lambda n: CMat.of(fn(n)), degree)


# ---------------------------------------------------------------------------
# Worked examples
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Example:
    """Everything a reproduction run checks for one worked example.

    `system` and the intertwining entries refer to operators by name; "V1", "V2" name the
    orthogonal system. `rebuilt` operators are reconstructed from their eigenvalues and
    compared against `printed`.
    """

    name: str
    params: dict[str, Fraction]
    weight: Weight
    operators: dict[str, DiffOp]
    expected_eigen: dict[str, EigenvalueMatrix]
    system: Callable[[Mapping[str, DiffOp]], tuple[DiffOp, ...]]
    generators: tuple[DiffOp, ...]
    expected_U: MatRF
    classical: DiffOp
    intertwining: tuple[tuple[str, tuple[DiffOp, ...]], ...]
    expected_R: tuple[FracElement, ...]
    expected_v: tuple[tuple | None, ...]
    centrality_ops: tuple[str, ...]
    expect_central: bool
    center: EigenvalueMatrix | None = None
    rebuilt: dict[str, int] = field(default_factory=dict)
    printed: dict[str, DiffOp] = field(default_factory=dict)
    notes: tuple[str, ...] = ()


def hermite_example(a) -> Example:
    p = {"a": Fraction(a)}
    a = p["a"]
    weight = build_weight("hermite-2x2", p)
    ops = {
        "D1": "dx^2*[[1,0],[0,1]] + dx*[[-2*x,2*a],[0,-2*x]] + [[-2,0],[0,0]]",
        "D2": "dx^2*[[-a^2/4, a^3*x/4],[0,0]] + dx*[[0,a/2],[-a/2,a^2*x/2]] + [[0,0],[0,1]]",
        "D3": "dx^2*[[-a^2*x/2, a^3*x^2/2],[-a/2, a^2*x/2]] + dx*[[-(a^2+1), a*(a^2+2)*x],[0,1]]"
              " + [[0,(a^2+2)/a],[0,0]]",
        "D4": "dx^2*[[-a^3*x/4, a^2*(a^2*x^2-1)/4],[-a^2/4, a^3*x/4]] + dx*[[-a^3/2, a^2*(a^2+2)*x/2],[0,0]]"
              " + [[0,(a^2+2)/2],[1,0]]",
    }
    operators = {k: parse_operator(v, p, 2) for k, v in ops.items()}
    quad = lambda n: (a**2 * n + 2) * (a**2 * n + a**2 + 2)
    expected = {
        "D1": _eigen(lambda n: [[-2 * n - 2, 0], [0, -2 * n]]),
        "D2": _eigen(lambda n: [[0, 0], [0, (a**2 * n + 2) / 2]]),
        "D3": _eigen(lambda n: [[0, quad(n) / (2 * a)], [0, 0]]),
        "D4": _eigen(lambda n: [[0, quad(n) / 4], [1, 0]]),
        "V2": _eigen(lambda n: [[-2 * a**2 * n - 2 * a**2 - 4, 0], [0, 0]]),
    }

    def system(named):
        d1, d2 = named["D1"], named["D2"]
        v2 = d1 * rf(a**2) + d2 * rf(4) - DiffOp.scalar(4, 2)
        return d2, v2

    _, d = classical_kernel("hermite")
    zero = DiffOp.zero(1)
    v1 = (d * rf(-a**2 / 4)).plus_scalar(1)
    v2 = (d * rf(a**2)).plus_scalar(-2 * a**2 - 4)
    return Example(
        name="hermite",
        params=p,
        weight=weight,
        operators=operators,
        expected_eigen=expected,
        system=system,
        generators=(
            parse_row_operator("[[dx*a/2, -dx*a^2*x/2 - 1]]", p),
            parse_row_operator("[[-1, dx*a/2]]", p),
        ),
        expected_U=parse_matrix("[[a/2, -a^2*x/2],[0, a/2]]", p),
        classical=d,
        intertwining=(("V1", (v1, zero)), ("V2", (zero, v2))),
        expected_R=(rf(a**2 / 4), rf(a**2 / 4)),
        expected_v=((1, -a**2 / 4), (-2 * a**2 - 4, a**2)),
        centrality_ops=("D1", "D2", "D3", "D4"),
        expect_central=False,
        notes=(
            "U W U^* = (a^2/4) e^(-x^2) I; the printed factor e^(x^2) does not match the product",
            "V1 + V2 annihilates pairwise but is not central: its eigenvalue is diag(-2a^2n-2a^2-4, (a^2n+2)/2)",
        ),
    )


LAGUERRE_PRINTED = {
    "D1": (
        "[[dx^4*a^2*x^2 + dx^3*2*a^2*((b+2)*x - x^2) + dx^2*a^2*((b+1)*(b+2) - (3*b+7)*x)"
        " - dx*a^2*(b+1)*(b+3),"
        " -dx^4*a^3*x^3 + dx^3*a^3*x^2*(2*x - 2*(b+2)) + dx^2*a*x*(a^2*(3*b+7)*x - a^2*(b-1)*(b-2) - 1)"
        " + dx*a*(a^2*x*(b+1)*(b+3) + 2*x - b - 1) + a*(b+1)],"
        " [-dx^2*a*x - dx*a*(b+1), dx^2*a^2*x^2 + dx*a^2*x*(b+1) + 1]]"
    ),
    "D2": (
        "[[dx^2*a^2*x^2 + dx*a^2*x*(b+3) + a^2*(b+1) + 1,"
        " dx^4*a^3*x^3 + dx^3*2*a^3*x^2*(b+4-x) + dx^2*a*x*(a^2*(b+7)*(b+2) + 1 - a^2*x*(3*b-11))"
        " + dx*a*(2*a^2*(b+1)*(b+2) + b + 1 - (a^2*(b^2+b+11)+2)*x)],"
        " [dx^2*a*x + dx*a*(b+1),"
        " dx^4*a^2*x^2 + dx^3*2*a^2*x*(b+2-x) + dx^2*a^2*((b+1)*(b+2) - (3*b+5)*x) - dx*a^2*(b+1)^2]]"
    ),
}


def laguerre_example(a, b) -> Example:
    p = {"a": Fraction(a), "b": Fraction(b)}
    a, b = p["a"], p["b"]
    weight = build_weight("laguerre-2x2", p)
    operators = {
        "D": parse_operator(
            "dx^2*[[x,0],[0,x]] + dx*[[1+b-x,2*a*x],[0,1+b-x]] + [[-1,a*(b+1)],[0,0]]", p, 2
        ),
    }
    c1 = lambda n: 1 + a**2 * b * n + a**2 * n**2
    big = lambda n: a**2 * n**2 + a**2 * (b + 2) * n + a**2 * (b + 1) + 1
    shift = lambda n: a * (2 * n + b + 1)
    expected = {
        "D": _eigen(lambda n: [[-n - 1, shift(n)], [0, -n]]),
        "D1": _eigen(lambda n: [[0, c1(n) * shift(n)], [0, c1(n)]]),
        "D2": _eigen(lambda n: [[big(n), -big(n) * shift(n)], [0, 0]]),
    }
    p_coeffs = (a**2 * b + a**2 + 1, -(a**2 * b + 2 * a**2), a**2)
    # q(t) = 1 - a^2 b (t+1) + a^2 (t+1)^2
    q_coeffs = (1 - a**2 * b + a**2, -a**2 * b + 2 * a**2, a**2)

    def system(named):
        d = named["D"]
        return (op_mul(named["D1"], scalar_poly_in(d, p_coeffs)),
                op_mul(named["D2"], scalar_poly_in(d, q_coeffs)))

    _, d = classical_kernel("laguerre", b=b)
    return Example(
        name="laguerre",
        params=p,
        weight=weight,
        operators=operators,
        expected_eigen=expected,
        system=system,
        generators=(
            parse_row_operator("[[dx^2*a*x + dx*a*(b+1), -dx^2*a^2*x^2 - dx*a^2*(b+1)*x - 1]]", p),
            parse_row_operator("[[1, dx^2*a*x + dx*a*(b+1-2*x) - a*(b+1)]]", p),
        ),
        expected_U=parse_matrix("[[a*x, -a^2*x^2],[0, a*x]]", p),
        classical=d,
        intertwining=(("D", (d, d.plus_scalar(-1))),),
        expected_R=(rf(a**2) * X**2, rf(a**2) * X**2),
        expected_v=(None, None),
        centrality_ops=("D", "D1", "D2"),
        expect_central=True,
        center=_eigen(lambda n: [[c1(n) * big(n), 0], [0, c1(n) * big(n)]]),
        rebuilt={"D1": 4, "D2": 4},
        printed={k: parse_operator(v, p, 2) for k, v in LAGUERRE_PRINTED.items()},
        notes=(
            "the dx^2 coefficient of D is x I; with the printed I the operator is not W-symmetric",
            "Lambda_D(n) = [[-n-1, a(2n+b+1)],[0,-n]]; diag(-n-1,-n) is its spectrum",
            "the (1,2) entry of Lambda_D1(n) has constant term a(b+1)",
            "V2 = D2 (I - a^2 b (D+I) + a^2 (D+I)^2); only D+I gives the printed central sum",
            "D1 and D2 are rebuilt from their eigenvalues; the printed entries are compared below",
            "U W U^* = x^(b+2) e^(-x) a^2 I",
        ),
    )


def jacobi_example(a, r) -> Example:
    p = {"a": Fraction(a), "r": Fraction(r)}
    a, r = p["a"], p["r"]
    weight = build_weight("jacobi-2x2", p)
    ops = {
        "D1": "dx^2*[[x^2,x],[-x,-1]] + dx*[[(r+2)*x, r-a+2],[-a,0]] + [[a*(r-a+1),0],[0,0]]",
        "D2": "dx^2*[[-1,-x],[x,x^2]] + dx*[[0,a-r],[a+2,(r+2)*x]] + [[0,0],[0,(a+1)*(r-a)]]",
        "D3": "dx^2*[[-x,-1],[x^2,x]] + dx*[[-a,0],[2*(a+1)*x,a+2]] + [[0,0],[a*(a+1),0]]",
        "D4": "dx^2*[[x,x^2],[-1,-x]] + dx*[[r-a+2,2*(r-a+1)*x],[0,a-r]] + [[0,(r-a)*(r-a+1)],[0,0]]",
    }
    operators = {k: parse_operator(v, p, 2) for k, v in ops.items()}
    expected = {
        "D1": _eigen(lambda n: [[(n + a) * (n + r - a + 1), 0], [0, 0]]),
        "D2": _eigen(lambda n: [[0, 0], [0, (n + a + 1) * (n + r - a)]]),
        "D3": _eigen(lambda n: [[0, 0], [(n + a) * (n + a + 1), 0]]),
        "D4": _eigen(lambda n: [[0, (n + r - a) * (n + r - a + 1)], [0, 0]]),
    }
    s = r - 2 * a

    def system(named):
        d1, d2 = named["D1"], named["D2"]
        return op_mul(d1.plus_scalar(s), d1), op_mul(d2.plus_scalar(-s), d2)

    def center(n):
        e = (n + a) * (n + r + 1 - a)
        return [[e * (e + s), 0], [0, e * (e + s)]]

    _, d = classical_kernel("jacobi", r / 2, r / 2)
    c1, c2 = a * (r - a + 1), (a + 1) * (r - a)
    e1, e2 = (-d).plus_scalar(c1), (-d).plus_scalar(c2)
    v = op_mul(e2, e1)
    zero = DiffOp.zero(1)
    edge = (1 - X**2) ** 2
    return Example(
        name="jacobi",
        params=p,
        weight=weight,
        operators=operators,
        expected_eigen=expected,
        system=system,
        generators=(
            parse_row_operator("[[dx*x + a, dx]]", p),
            parse_row_operator("[[dx, dx*x + r - a]]", p),
        ),
        expected_U=parse_matrix("[[x, 1],[1, x]]", p),
        classical=d,
        intertwining=(
            ("D1", (e1, zero)),
            ("D2", (zero, e2)),
            ("V1", (v, zero)),
            ("V2", (zero, v)),
        ),
        expected_R=(edge * rf(a), edge * rf(r - a)),
        expected_v=((c1 * c2, -(c1 + c2), 1), (c1 * c2, -(c1 + c2), 1)),
        centrality_ops=("D1", "D2", "D3", "D4"),
        expect_central=True,
        center=_eigen(center),
        notes=(
            "the dx^2 coefficient of D1 is [[x^2,x],[-x,-1]]; with (2,2) entry 1 D1 D2 != 0",
            "U D1 = diag(-d + a(r-a+1), 0) U and U D2 = diag(0, -d + (a+1)(r-a)) U",
            "U W U^* = (1-x^2)^(r/2+1) diag(a, r-a): exponent r/2+1 relative to the Gegenbauer family",
        ),
    )


def example(name: str, params: Mapping[str, object]) -> Example:
    if name in EXAMPLES:
        params = _params(f"{name}-2x2", params)
    if name == "hermite":
        return hermite_example(params["a"])
    if name == "laguerre":
        return laguerre_example(params["a"], params["b"])
    if name == "jacobi":
        return jacobi_example(params["a"], params["r"])
    raise SpecSemanticError(f"unknown example {name!r}; known: {', '.join(EXAMPLES)}")


# ---------------------------------------------------------------------------
# Random specializations
# ---------------------------------------------------------------------------

def _positive(rng: random.Random, bound: int) -> Fraction:
    return Fraction(rng.randint(1, bound), rng.randint(1, bound))


def random_specializations(name: str, rng: random.Random, count: int,
                           bound: int = PARAM_BOUND) -> list[dict[str, Fraction]]:
    """Parameter sets satisfying the example's constraints, deterministic for a seeded rng."""
    out = []
    while len(out) < count:
        if name == "hermite":
            a = _positive(rng, bound) * rng.choice((1, -1))
            out.append({"a": a})
        elif name == "laguerre":
            a = _positive(rng, bound) * rng.choice((1, -1))
            q = rng.randint(1, bound)
            b = Fraction(rng.randint(-q + 1, bound), q)
            out.append({"a": a, "b": b})
        elif name == "jacobi":
            a, r = sorted((_positive(rng, bound), _positive(rng, bound)))
            if a == r:
                continue
            out.append({"a": a, "r": r})
        else:
            raise SpecSemanticError(f"unknown example {name!r}")
    return out


# ---------------------------------------------------------------------------
# Darboux datasets
# ---------------------------------------------------------------------------

DARBOUX_DATASETS = ("jacobi-conjugacy", "hermite-factorization", "laguerre-shift") + EXAMPLES


def darboux_dataset(name: str, params: Mapping[str, object] | None = None,
                    n_win: int = 6) -> tuple[DarbouxData, tuple[DiffOp, ...]]:
    """Supplied Darboux data plus the system operators the factorization refers to."""
    params = params or {}
    if name == "jacobi-conjugacy":
        # a, b are the exponents of 1-x and 1+x
        it = jacobi_intertwiner(params.get("a", 0), params.get("b", 0))
        shifted = it.e_shifted.plus_scalar(-(it.alpha + it.beta + 2))
        return DarbouxData(h=it.t, d=it.e, d_tilde=shifted), ()
    if name == "hermite-factorization":
        _, d = classical_kernel("hermite")
        t_tilde = parse_operator("dx - 2*x")
        data = DarbouxData(t=DiffOp.dx(1), t_tilde=t_tilde, targets=(d,), p=((0, 1),), q=(1,))
        return data, (d.plus_scalar(-2),)
    if name == "laguerre-shift":
        b = Fraction(params.get("b", 0))
        low = monic_sequence(build_weight("laguerre", {"b": b}), n_win + 1)
        high = monic_sequence(build_weight("laguerre", {"b": b + 1}), n_win + 1)
        data = DarbouxData(t=DiffOp.dx(1), seq=low, seq_tilde=high,
                           c_of_n=lambda n: CMat.of([[n]]), shift=-1, n_win=n_win)
        return data, ()
    ex = example(name, params)
    u_op = DiffOp.vstack(list(ex.generators))
    named = dict(ex.operators)
    if ex.rebuilt:
        seq = monic_sequence(ex.weight, 2 * max(ex.rebuilt.values()) + 2)
        named.update({k: operator_from_eigenvalue(ex.expected_eigen[k], seq, order)
                      for k, order in ex.rebuilt.items()})
    vs = ex.system(named)
    named.update({f"V{i + 1}": v for i, v in enumerate(vs)})
    intertwining = tuple((k, named[k], targets) for k, targets in ex.intertwining)
    return DarbouxData(u_op=u_op, intertwining=intertwining), vs

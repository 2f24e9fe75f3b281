"""End-to-end reproduction of the worked examples, one Report per run.

Each specialization runs the same stages: sequence, membership, orthogonal system,
generators and U, diagonalization, v_i, symmetry and intertwining. Specializations are
independent and run on the worker pool; their sub-reports are merged in input order.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Mapping

from mopcheck import config
from mopcheck.catalog import Example, example, random_specializations
from mopcheck.darboux import DarbouxData, darboux_verify
from mopcheck.errors import CertificateError, InconclusiveError, MopError, WindowError
from mopcheck.exact import X, crat
from mopcheck.fourier import (
    band_representation,
    build_L,
    dw_membership,
    eigen_dagger_check,
    fourier_image,
    left_fourier_test,
    operator_from_eigenvalue,
)
from mopcheck.opalg import DiffOp, ad_power, max_coefficient_degree, op_mul
from mopcheck.pipeline import parallel_map
from mopcheck.report import Report
from mopcheck.specio import (
    format_eigen,
    format_matrix,
    format_op,
    format_poly_t,
    format_rational,
    format_ratfun,
)
from mopcheck.structure import (
    adjoint_symmetry_checks,
    build_U,
    compute_vi,
    cyclic_generator,
    diagonalize_weight,
    effective_kernel,
    express_in_classical,
    left_ratio,
    verify_orthogonal_system,
)
from mopcheck.weights import MOPSequence, monic_sequence, orthogonality_defects, recurrence_coeffs
from shared import telemetry
from shared.tracing import set_output, span


def param_label(params: Mapping[str, Fraction]) -> str:
    return ",".join(f"{k}={format_rational(Fraction(v))}" for k, v in sorted(params.items()))


# ---------------------------------------------------------------------------
# Reusable stage checks
# ---------------------------------------------------------------------------

def sequence_checks(report: Report, seq: MOPSequence, top: int = 8) -> None:
    """Orthogonality for m < n <= top and the exact three-term recurrence."""
    defects = orthogonality_defects(seq, min(top, seq.n_max))
    report.certify("<P(n), P(m)> = 0 for m < n", not defects, f"pairs {defects[:3]}" if defects else "")
    try:
        recurrence_coeffs(seq)
        report.certify("three-term recurrence", True)
    except CertificateError as e:
        report.certify(e.name, False, e.residual)


def fourier_algebra_checks(report: Report, name: str, d: DiffOp, seq: MOPSequence, n_win: int) -> None:
    """Band width, the left Fourier test against L, Ad_x^(ord+1) D = 0 and the adjoint eigenvalues."""
    order = max(d.order, 0)
    band = band_representation(d, seq, n_win)
    width_ok = band.band is None or (band.band[1] <= 0 and -band.band[0] <= max_coefficient_degree(d))
    report.certify(f"{name}: band within its coefficient degree", width_ok, str(band.band))
    test = left_fourier_test(band, build_L(seq), order + 1)
    if test.status == "inconclusive":
        report.certify(f"{name}: left Fourier test", None, f"window {test.window}")
    else:
        report.certify(f"{name}: left Fourier test", test.status == "accept" and test.k <= order,
                       f"k={test.k}")
    x_op = DiffOp.scalar(X, d.shape[0])
    report.certify(f"{name}: Ad_x^(ord+1) = 0", ad_power(x_op, d, order + 1).is_zero())
    bad = eigen_dagger_check(d, seq, n_win)
    report.certify(f"{name}: Lambda of the adjoint is H Lambda^* H^-1", not bad, f"n={bad[:3]}" if bad else "")


# ---------------------------------------------------------------------------
# One specialization
# ---------------------------------------------------------------------------

def _membership(report: Report, ex: Example, named: dict[str, DiffOp], seq: MOPSequence, n_win: int):
    for name, d in named.items():
        check = dw_membership(d, seq, n_win)
        report.certify(f"{name} in D(W)", check.accepted,
                       "" if check.accepted else f"{check.reason} at n={check.witness}")
        if not check.accepted:
            continue
        report.values[f"Lambda_{name}(n)"] = format_eigen(check.eigen)
        if name in ex.expected_eigen:
            report.certify(f"Lambda_{name}(n) matches", check.eigen == ex.expected_eigen[name])


def _rebuild(report: Report, ex: Example, named: dict[str, DiffOp], seq: MOPSequence) -> None:
    for name, order in ex.rebuilt.items():
        d = operator_from_eigenvalue(ex.expected_eigen[name], seq, order)
        named[name] = d
        report.values[name] = format_op(d)
        printed = ex.printed.get(name)
        if printed is None:
            continue
        same = [f"({i + 1},{k + 1})" for i in range(d.shape[0]) for k in range(d.shape[1])
                if d.entry(i, k) == printed.entry(i, k)]
        report.values[f"{name} printed entries reproduced"] = " ".join(same) or "none"


def _system(report: Report, ex: Example, named: dict[str, DiffOp], seq: MOPSequence, n_win: int):
    vs = ex.system(named)
    for i, v in enumerate(vs):
        named[f"V{i + 1}"] = v
    gens = [named[n] for n in ex.centrality_ops]
    system = verify_orthogonal_system(vs, seq, gens, n_win)
    for i, ok in enumerate(system.symmetric):
        report.certify(f"V{i + 1} is W-symmetric", ok)
    report.certify("V_i V_j = 0 for i != j", system.pairwise_zero, str(system.failed_pairs) if system.failed_pairs else "")
    report.certify("V1 + ... + VN is not a zero divisor", system.non_zero_divisor)
    if ex.expect_central:
        report.certify("V1 + ... + VN is central", system.central)
    else:
        report.certify("V1 + ... + VN is not central", system.central is False)
    report.certify("rank bound <= N", system.rank_bound <= system.size, str(system.rank_bound))
    for i, lam in enumerate(system.eigen):
        key = f"V{i + 1}"
        report.values[f"Lambda_{key}(n)"] = format_eigen(lam)
        if key in ex.expected_eigen:
            report.certify(f"Lambda_{key}(n) matches", lam == ex.expected_eigen[key])
    if ex.center is not None:
        total = fourier_image(sum(vs[1:], vs[0]))
        report.certify("Lambda of V1 + ... + VN matches", total == ex.center)
    return system


def _generators(report: Report, ex: Example, system, order_cap: int):
    for i, printed in enumerate(ex.generators):
        for j, v in enumerate(system.ops):
            if j != i:
                report.certify(f"u{i + 1} V{j + 1} = 0", op_mul(printed, v).is_zero())
        try:
            found = cyclic_generator(system, i, order_cap)
        except InconclusiveError as e:
            report.certify(f"u{i + 1} found", None, str(e))
            continue
        ratio = left_ratio(printed, found.op)
        report.certify(f"u{i + 1} agrees with the computed generator up to a left factor",
                       ratio is not None and found.order == printed.order and found.minimal,
                       f"order {found.order}" + ("" if found.minimal else ", not minimal"))
        report.values[f"u{i + 1}"] = format_op(printed)
    u_op, u_matrix = build_U(list(ex.generators))
    report.values["U(x)"] = format_matrix(u_matrix)
    report.certify("U(x) matches", u_matrix == ex.expected_U)
    return u_op, u_matrix


def _diagonal(report: Report, ex: Example, u_matrix) -> None:
    entries = diagonalize_weight(u_matrix, ex.weight)
    report.certify("U W U^* is diagonal", True)
    kernel = ex.weight.kernel.describe()
    for i, kt in enumerate(entries):
        report.values[f"r{i + 1}(x)"] = f"{kernel}*({format_ratfun(kt.rational)})"
        exps = effective_kernel(kt)
        if exps:
            report.values[f"r{i + 1} kernel exponents"] = ",".join(
                f"{k}:{format_rational(v)}" for k, v in sorted(exps.items()))
        report.certify(f"r{i + 1} matches", kt.rational == ex.expected_R[i])


def _scalar_ops(report: Report, ex: Example, system) -> list[DiffOp]:
    vs = []
    for i, u in enumerate(ex.generators):
        v = compute_vi(u, system.ops[i])
        vs.append(v)
        report.values[f"v{i + 1}"] = format_op(v)
        try:
            coeffs = express_in_classical(v, ex.classical)
            report.values[f"v{i + 1} = p(d), p(t)"] = format_poly_t(coeffs)
            expected = ex.expected_v[i]
            if expected is None:
                report.certify(f"v{i + 1} is a polynomial in d", True)
            else:
                report.certify(f"v{i + 1} matches", coeffs == [crat(c) for c in expected])
        except CertificateError as e:
            report.certify(f"v{i + 1} is a polynomial in d", False, e.residual)
        sym = adjoint_symmetry_checks(u, v, ex.weight)
        report.certify(f"v{i + 1} b{i + 1} = b{i + 1} v{i + 1}^*", sym.commutes)
        report.certify(f"v{i + 1}: first-order equation for r{i + 1}", not sym.ode_residual,
                       format_ratfun(sym.ode_residual) if sym.ode_residual else "")
        for end, ok in sorted(sym.endpoints.items()):
            report.certify(f"v{i + 1}: leading coefficient vanishes at x={end}", ok)
    return vs


def reproduce_one(ex: Example, n_win: int = config.DEFAULT_N_WIN,
                  order_cap: int = config.DEFAULT_ORDER_CAP) -> Report:
    """Every certificate for one parameter specialization of an example."""
    report = Report(task=f"reproduce {ex.name}", inputs={k: format_rational(v) for k, v in ex.params.items()})
    label = param_label(ex.params)
    with span(f"reproduce:{ex.name}", {"params": label}):
        try:
            with span("stage:sequence"):
                seq = monic_sequence(ex.weight, max(n_win, 10) + 2)
                sequence_checks(report, seq)
            named = dict(ex.operators)
            with span("stage:membership"):
                _rebuild(report, ex, named, seq)
                _membership(report, ex, dict(named), seq, n_win)
                for name, d in named.items():
                    fourier_algebra_checks(report, name, d, seq, n_win)
            with span("stage:structure"):
                system = _system(report, ex, named, seq, n_win)
                u_op, u_matrix = _generators(report, ex, system, order_cap)
                _diagonal(report, ex, u_matrix)
                _scalar_ops(report, ex, system)
            with span("stage:darboux"):
                data = DarbouxData(
                    u_op=u_op,
                    intertwining=tuple((name, named[name], targets) for name, targets in ex.intertwining),
                )
                for check in darboux_verify(data):
                    report.certify(check.name, check.passed, check.detail)
        except CertificateError as e:
            report.certify(e.name, False, e.residual)
        except (InconclusiveError, WindowError) as e:
            report.certify("window", None, str(e))
        report.notes.extend(ex.notes)
        set_output({"status": report.status})
    telemetry.say(f"[reproduce] {ex.name} {label}: {report.status}")
    return report


def reproduce(name: str, params: Mapping[str, object] | None = None, seed: int = 0,
              count: int = config.DEFAULT_SPECIALIZATIONS, n_win: int = config.DEFAULT_N_WIN,
              order_cap: int = config.DEFAULT_ORDER_CAP) -> Report:
    """Given parameters (if any) plus `count` seeded random specializations."""
    specs = [dict(params)] if params else []
    specs += random_specializations(name, random.Random(seed), count)
    if not specs:
        raise MopError("nothing to reproduce: no parameters and no specializations")
    examples = [example(name, s) for s in specs]
    parts = parallel_map(lambda ex: reproduce_one(ex, n_win, order_cap), examples, label="reproduce")
    report = Report(task=f"reproduce {name}", inputs={
        "seed": str(seed),
        "specializations": str(len(specs)),
        "n_win": str(n_win),
        "order_cap": str(order_cap),
    })
    for ex, part in zip(examples, parts):
        report.merge(part, f"[{param_label(ex.params)}] ")
    report.notes = list(dict.fromkeys(n for part in parts for n in part.notes))
    return report

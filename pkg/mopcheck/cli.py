"""mopcheck command line.

Every subcommand builds a Report; it is written once, atomically, to --out (or stdout).
Exit codes: 0 all certificates pass, 1 a certificate failed, 2 usage or parse error,
3 inconclusive.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import re
import sys
import tempfile
import uuid
from collections import Counter
from fractions import Fraction
from pathlib import Path

from mopcheck import config
from mopcheck.catalog import (
    DARBOUX_DATASETS,
    EXAMPLES,
    EXCEPTIONAL_OPERATORS,
    WEIGHTS,
    build_weight,
    classical_operator,
    darboux_dataset,
)
from mopcheck.darboux import darboux_verify, exceptional_degrees
from mopcheck.errors import (
    CertificateError,
    InconclusiveError,
    MopError,
    SpecSemanticError,
    SpecSyntaxError,
    WeightError,
    WindowError,
)
from mopcheck.fourier import (
    band_representation,
    bilinear_identity,
    dagger_compatibility,
    dw_membership,
    positivity_witness,
)
from mopcheck.opalg import formal_dagger, random_operator
from mopcheck.report import Report, emit_report, report_schema
from mopcheck.reproduce import fourier_algebra_checks, reproduce, sequence_checks
from mopcheck.specio import (
    format_eigen,
    format_matrix,
    format_op,
    format_poly_t,
    format_rational,
    format_ratfun,
    parse_operator,
    read_source,
)
from mopcheck.structure import (
    adjoint_symmetry_checks,
    cyclic_data,
    effective_kernel,
    express_in_classical,
    verify_orthogonal_system,
)
from mopcheck.weights import monic_sequence
from shared import telemetry
from shared.tracing import init_tracing, set_output, span

_RATIONAL = re.compile(r"-?\d+(/\d+)?")


def rational(text: str) -> Fraction:
    """Exact rational "p" or "p/q"; decimals are refused."""
    if not _RATIONAL.fullmatch(text.strip()):
        raise argparse.ArgumentTypeError(f"expected an exact rational like 2/3, got {text!r}")
    try:
        return Fraction(text.strip())
    except ZeroDivisionError:
        raise argparse.ArgumentTypeError(f"zero denominator in {text!r}")


def binding(text: str) -> tuple[str, Fraction]:
    name, sep, value = text.partition("=")
    if not sep or not name.isidentifier():
        raise argparse.ArgumentTypeError(f"expected name=p/q, got {text!r}")
    return name, rational(value)


def _params(args) -> dict[str, Fraction]:
    out = dict(args.param or [])
    for name in ("a", "b", "r"):
        value = getattr(args, name, None)
        if value is not None:
            out[name] = value
    return out


def _inputs(args, **extra) -> dict[str, str]:
    out = {k: format_rational(v) for k, v in _params(args).items()}
    out.update({k: str(v) for k, v in extra.items()})
    return out


def _operator(src: str, params, size: int):
    return parse_operator(read_source(src), params, size)


def _sequence(weight, n_win: int):
    with span("stage:sequence", {"weight": weight.name, "n_max": n_win + 2}):
        return monic_sequence(weight, n_win + 2)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_mops(args) -> Report:
    params = _params(args)
    weight = build_weight(args.weight, params)
    report = Report(task="mops", inputs=_inputs(args, weight=args.weight, nmax=args.nmax))
    with span("stage:sequence", {"weight": args.weight}):
        seq = monic_sequence(weight, args.nmax)
    sequence_checks(report, seq)
    report.certify("H(n) positive definite", True)
    for n, p in enumerate(seq.polys):
        report.values[f"P({n})"] = format_matrix(p.to_matrf())
        report.values[f"H({n})"] = format_matrix(seq.norms[n])
    for n, (b, c) in enumerate(zip(seq.recurrence_b, seq.recurrence_c)):
        report.values[f"B({n})"] = format_matrix(b)
        report.values[f"C({n})"] = format_matrix(c)
    return report


def cmd_check_dw(args) -> Report:
    params = _params(args)
    weight = build_weight(args.weight, params)
    d = _operator(args.op, params, weight.size)
    report = Report(task="check-dw", inputs=_inputs(args, weight=args.weight, op=format_op(d)))
    seq = _sequence(weight, args.nwin)
    with span("stage:membership"):
        check = dw_membership(d, seq, args.nwin)
    if not check.accepted:
        report.certify("D in D(W)", False, f"{check.reason} at n={check.witness}")
        if check.witness is not None:
            report.values["reject witness n"] = str(check.witness)
        return report
    report.certify("D in D(W)", True)
    report.values["Lambda(n)"] = format_eigen(check.eigen)
    report.values["window covers the degree bound"] = "yes" if check.proof else "no"
    fourier_algebra_checks(report, "D", d, seq, args.nwin)
    witness = positivity_witness(d, seq, args.nwin)
    report.certify("D D^dagger != 0 with Lambda = Lambda_D H Lambda_D^* H^-1", bool(witness))
    return report


def cmd_adjoint(args) -> Report:
    params = _params(args)
    weight = build_weight(args.weight, params)
    report = Report(task="adjoint", inputs=_inputs(args, weight=args.weight, random=args.random, seed=args.seed))
    if args.op:
        d = _operator(args.op, params, weight.size)
        report.inputs["op"] = format_op(d)
        dag = formal_dagger(d, weight)
        report.values["D^dagger"] = format_op(dag)
        report.values["W-symmetric"] = "yes" if dag == d else "no"
        report.certify("(D^dagger)^dagger = D", formal_dagger(dag, weight) == d)
        seq = _sequence(weight, args.nwin)
        if dw_membership(d, seq, args.nwin):
            band = band_representation(d, seq, args.nwin)
            bad = bilinear_identity(band, seq)
            report.certify("<M.P(n), P(j)> = <P(n), M^dagger.P(j)> on the window", not bad,
                           f"pairs {bad[:3]}" if bad else "")
            report.certify("Fourier image of D^dagger is the discrete adjoint", dagger_compatibility(d, seq, args.nwin))
    if weight.size == 1:
        classical = classical_operator(args.weight, params)
        report.certify("classical operator is W-symmetric", formal_dagger(classical, weight) == classical)
    rng = random.Random(args.seed)
    for k in range(args.random):
        d = random_operator(rng, weight.size, args.order, complex_entries=True)
        report.certify(f"random operator {k + 1}: (D^dagger)^dagger = D",
                       formal_dagger(formal_dagger(d, weight), weight) == d)
    return report


def _system(args, report: Report):
    params = _params(args)
    weight = build_weight(args.weight, params)
    ops = [_operator(src, params, weight.size) for src in args.op]
    central = [_operator(src, params, weight.size) for src in args.central] if args.central else None
    for i, v in enumerate(ops):
        report.inputs[f"V{i + 1}"] = format_op(v)
    seq = _sequence(weight, args.nwin)
    with span("stage:structure"):
        system = verify_orthogonal_system(ops, seq, central, args.nwin)
    for i, ok in enumerate(system.symmetric):
        report.certify(f"V{i + 1} is W-symmetric", ok)
    report.certify("V_i V_j = 0 for i != j", system.pairwise_zero,
                   str(system.failed_pairs) if system.failed_pairs else "")
    report.certify("V1 + ... + VN is not a zero divisor", system.non_zero_divisor)
    if system.central is not None:
        report.values["V1 + ... + VN central"] = "yes" if system.central else "no"
    report.values["rank lower bound"] = str(system.rank_bound)
    for i, lam in enumerate(system.eigen):
        report.values[f"Lambda_V{i + 1}(n)"] = format_eigen(lam)
    return weight, system


def cmd_orthosystem(args) -> Report:
    report = Report(task="orthosystem", inputs=_inputs(args, weight=args.weight))
    _system(args, report)
    return report


def cmd_diagonalize(args) -> Report:
    report = Report(task="diagonalize", inputs=_inputs(args, weight=args.weight, order_cap=args.order_cap))
    weight, system = _system(args, report)
    system.require()
    with span("stage:cyclic"):
        data = cyclic_data(system, args.order_cap)
    report.values["U(x)"] = format_matrix(data.u_matrix)
    classical = _operator(args.classical, _params(args), 1) if args.classical else None
    for i, (gen, v, kt) in enumerate(zip(data.generators, data.vs, data.diagonal)):
        report.values[f"u{i + 1}"] = format_op(gen.op)
        report.values[f"v{i + 1}"] = format_op(v)
        report.values[f"r{i + 1}(x)"] = f"{weight.kernel.describe()}*({format_ratfun(kt.rational)})"
        for k, e in sorted(effective_kernel(kt).items()):
            report.values[f"r{i + 1} exponent of {k}"] = format_rational(e)
        sym = adjoint_symmetry_checks(gen.op, v, weight)
        report.certify(f"v{i + 1} b{i + 1} = b{i + 1} v{i + 1}^*", sym.commutes)
        report.certify(f"v{i + 1}: first-order equation for r{i + 1}", not sym.ode_residual)
        for end, ok in sorted(sym.endpoints.items()):
            report.certify(f"v{i + 1}: leading coefficient vanishes at x={end}", ok)
        if classical is not None:
            try:
                report.values[f"v{i + 1} = p(d), p(t)"] = format_poly_t(express_in_classical(v, classical))
            except CertificateError as e:
                report.certify(f"v{i + 1} is a polynomial in d", False, e.residual)
    report.certify("U W U^* is diagonal", True)
    return report


def cmd_darboux(args) -> Report:
    params = _params(args)
    report = Report(task="darboux", inputs=_inputs(args, dataset=args.dataset))
    with span("stage:darboux", {"dataset": args.dataset}):
        data, ops = darboux_dataset(args.dataset, params, args.nwin)
        for check in darboux_verify(data, ops):
            report.certify(check.name, check.passed, check.detail)
    return report


def cmd_exceptional(args) -> Report:
    src = EXCEPTIONAL_OPERATORS.get(args.op, args.op)
    d = _operator(src, _params(args), 1)
    report = Report(task="exceptional", inputs=_inputs(args, op=format_op(d), nmax=args.nmax))
    with span("stage:exceptional"):
        found = exceptional_degrees(d, args.nmax)
    report.values["exceptional degrees"] = "{" + ",".join(str(n) for n in found) + "}"
    if args.expect is not None:
        expected = sorted({int(v) for v in args.expect.split(",") if v.strip()})
        report.certify("exceptional degrees match", found == expected, f"expected {expected}")
    return report


def cmd_reproduce(args) -> Report:
    return reproduce(args.example, _params(args), args.seed, args.specializations, args.nwin, args.order_cap)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--a", type=rational)
    common.add_argument("--b", type=rational)
    common.add_argument("--r", type=rational)
    common.add_argument("--param", type=binding, action="append", metavar="NAME=P/Q")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--nwin", type=int, default=config.DEFAULT_N_WIN)
    common.add_argument("--order-cap", type=int, default=config.DEFAULT_ORDER_CAP)
    common.add_argument("--out", type=Path)
    common.add_argument("--format", choices=("json", "text"), default="json")

    parser = argparse.ArgumentParser(prog="mopcheck", description="Exact checks for matrix orthogonal polynomials")
    sub = parser.add_subparsers(dest="command", required=True)
    weights = sorted(WEIGHTS)

    p = sub.add_parser("mops", parents=[common], help="monic polynomials, norms and recurrence")
    p.add_argument("--weight", choices=weights, required=True)
    p.add_argument("--nmax", type=int, default=6)
    p.set_defaults(func=cmd_mops)

    p = sub.add_parser("check-dw", parents=[common], help="membership in D(W) and Lambda(n)")
    p.add_argument("--weight", choices=weights, required=True)
    p.add_argument("--op", required=True, help="inline DSL or a .mop file")
    p.set_defaults(func=cmd_check_dw)

    p = sub.add_parser("adjoint", parents=[common], help="formal W-adjoint")
    p.add_argument("--weight", choices=weights, required=True)
    p.add_argument("--op")
    p.add_argument("--random", type=int, default=0, help="also check this many random operators")
    p.add_argument("--order", type=int, default=3)
    p.set_defaults(func=cmd_adjoint)

    for name, func, text in (("orthosystem", cmd_orthosystem, "certify an orthogonal system"),
                             ("diagonalize", cmd_diagonalize, "generators, U(x), v_i and U W U^*")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--weight", choices=weights, required=True)
        p.add_argument("--op", action="append", required=True, help="a system operator V_i (repeat)")
        p.add_argument("--central", action="append", help="a D(W) generator for the centrality check (repeat)")
        if name == "diagonalize":
            p.add_argument("--classical", help="scalar operator d to express the v_i in")
        p.set_defaults(func=func)

    p = sub.add_parser("darboux", parents=[common], help="verify supplied Darboux data")
    p.add_argument("dataset", choices=DARBOUX_DATASETS)
    p.set_defaults(func=cmd_darboux)

    p = sub.add_parser("exceptional", parents=[common], help="degrees without a polynomial eigenfunction")
    p.add_argument("--op", required=True, help=f"DSL or one of {', '.join(EXCEPTIONAL_OPERATORS)}")
    p.add_argument("--nmax", type=int, default=10)
    p.add_argument("--expect", help="comma separated expected degrees")
    p.set_defaults(func=cmd_exceptional)

    p = sub.add_parser("reproduce", parents=[common], help="reproduce a worked example")
    p.add_argument("example", choices=EXAMPLES)
    p.add_argument("--specializations", type=int, default=config.DEFAULT_SPECIALIZATIONS)
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("schema", parents=[common], help="JSON schema of the report")
    p.set_defaults(func=None)
    return parser


def write_atomic(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _emit(args, data: bytes) -> None:
    if args.out:
        write_atomic(args.out, data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2

    if args.command == "schema":
        _emit(args, (json.dumps(report_schema(), sort_keys=True, indent=2) + "\n").encode("utf-8"))
        return 0

    telemetry.init(f"mopcheck-{uuid.uuid4().hex[:8]}")
    init_tracing()
    try:
        with span(f"cli:{args.command}", {"argv": argv if argv is not None else sys.argv[1:]}):
            try:
                report = args.func(args)
            except (SpecSyntaxError, SpecSemanticError, WeightError) as e:
                telemetry.say(f"[cli] error: {e}")
                return 2
            except (InconclusiveError, WindowError) as e:
                telemetry.say(f"[cli] inconclusive: {e}")
                report = Report(task=args.command, inputs=_inputs(args))
                report.certify("window", None, str(e))
            except CertificateError as e:
                telemetry.say(f"[cli] certificate failed: {e}")
                report = Report(task=args.command, inputs=_inputs(args))
                report.certify(e.name, False, e.residual)
            except MopError as e:
                telemetry.say(f"[cli] error: {e}")
                return 1
            _emit(args, emit_report(report, args.format))
            set_output({"status": report.status})
        telemetry.say(f"[cli] {args.command}: {report.status}")
        telemetry.report_summary(report.task, report.status, Counter(c.status for c in report.certificates))
        return report.exit_code()
    finally:
        telemetry.flush()


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

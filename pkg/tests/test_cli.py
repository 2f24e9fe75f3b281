import json
from pathlib import Path

import pytest

from mopcheck.cli import rational, run
from mopcheck.report import load_report
from tests.conftest import certificate


@pytest.fixture(autouse=True)
def quiet(monkeypatch):
    monkeypatch.delenv("MOP_TELEMETRY_URL", raising=False)
    monkeypatch.delenv("LMNR_PROJECT_API_KEY", raising=False)


def run_report(tmp_path, *argv):
    out = tmp_path / "report.json"
    code = run([*argv, "--out", str(out)])
    return code, load_report(out.read_bytes())


def test_bare_derivative_is_not_in_dw(tmp_path):
    code, report = run_report(tmp_path, "check-dw", "--weight", "hermite-2x2", "--a", "1", "--op", "dx")
    assert code == 1
    assert report.values["reject witness n"] == "1"
    assert certificate(report, "D in D(W)").status == "fail"


def test_operator_from_a_file(tmp_path):
    src = tmp_path / "hermite.mop"
    src.write_text("dx^2 - dx*2*x  # classical\n", encoding="utf-8")
    code, report = run_report(tmp_path, "check-dw", "--weight", "hermite", "--op", str(src), "--nwin", "8")
    assert code == 0
    assert report.values["Lambda(n)"] == "[[-2*n]]"


def test_exceptional(tmp_path):
    code, report = run_report(tmp_path, "exceptional", "--op", "exceptional-x2", "--nmax", "10", "--expect", "1,2")
    assert code == 0
    assert report.values["exceptional degrees"] == "{1,2}"


def test_exceptional_mismatch(tmp_path):
    code, _ = run_report(tmp_path, "exceptional", "--op", "exceptional-x2-quoted", "--nmax", "4", "--expect", "1,2")
    assert code == 1


@pytest.mark.parametrize("argv", [
    ["check-dw", "--weight", "hermite-2x2", "--a", "0.5", "--op", "dx"],
    ["check-dw", "--weight", "hermite", "--op", "c*dx"],
    ["check-dw", "--weight", "hermite", "--op", "dx*0.5"],
    ["mops", "--weight", "laguerre", "--nmax", "2"],
    ["mops", "--weight", "hermite-2x2", "--a", "0"],
    ["reproduce", "bessel"],
])
def test_usage_errors(tmp_path, argv):
    assert run([*argv, "--out", str(tmp_path / "r.json")]) == 2
    assert not (tmp_path / "r.json").exists()


def test_rational_arguments():
    assert rational("-3/4") == -0.75
    with pytest.raises(Exception):
        rational("1/0")


def test_schema(tmp_path):
    out = tmp_path / "schema.json"
    assert run(["schema", "--out", str(out)]) == 0
    assert "certificates" in json.loads(out.read_text())["properties"]


def test_mops(tmp_path):
    code, report = run_report(tmp_path, "mops", "--weight", "hermite", "--nmax", "3")
    assert code == 0
    assert report.values["P(2)"] == "[[x^2-1/2]]"
    assert report.values["C(1)"] == "[[1/2]]"


def test_text_output(tmp_path, capsys):
    assert run(["mops", "--weight", "hermite", "--nmax", "1", "--format", "text"]) == 0
    assert capsys.readouterr().out.startswith("task: mops\nstatus: pass\n")


def test_reproduce_is_deterministic(tmp_path):
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    argv = ["reproduce", "hermite", "--a", "2", "--specializations", "0", "--nwin", "8"]
    assert run([*argv, "--out", str(first)]) == 0
    assert run([*argv, "--out", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()


def test_adjoint(tmp_path):
    code, report = run_report(tmp_path, "adjoint", "--weight", "laguerre", "--b", "1/3",
                              "--random", "3", "--order", "2")
    assert code == 0
    assert len(report.certificates) == 4


def test_adjoint_of_an_operator(tmp_path):
    code, report = run_report(tmp_path, "adjoint", "--weight", "hermite-2x2", "--a", "2", "--nwin", "6",
                              "--op", "dx^2*[[1,0],[0,1]] + dx*[[-2*x,2*a],[0,-2*x]] + [[-2,0],[0,0]]")
    assert code == 0
    assert report.values["W-symmetric"] == "yes"


def test_darboux(tmp_path):
    code, report = run_report(tmp_path, "darboux", "jacobi-conjugacy", "--a", "1/2", "--b", "1/3")
    assert code == 0
    assert report.certificates[0].name == "h d = d~ h"


def test_orthosystem(tmp_path):
    code, report = run_report(tmp_path, "orthosystem", "--weight", "hermite", "--op", "dx^2 - dx*2*x", "--nwin", "6")
    assert code == 0
    assert report.values["Lambda_V1(n)"] == "[[-2*n]]"


def test_bundled_operator_file(tmp_path):
    src = Path(__file__).resolve().parents[1] / "ops" / "hermite-2x2-d1.mop"
    code, report = run_report(tmp_path, "check-dw", "--weight", "hermite-2x2", "--a", "2", "--op", str(src),
                              "--nwin", "8")
    assert code == 0
    assert report.values["Lambda(n)"] == "[[-2*n-2,0],[0,-2*n]]"

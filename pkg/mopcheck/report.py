"""Verification reports: pydantic models plus deterministic JSON / text emission."""

from __future__ import annotations

import json
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

Status = Literal["pass", "fail", "inconclusive"]


class Certificate(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str
    status: Status
    residual: str = ""


class Report(BaseModel):
    model_config = ConfigDict(extra="forbid")

    task: str
    inputs: dict[str, str] = Field(default_factory=dict)
    certificates: list[Certificate] = Field(default_factory=list)
    values: dict[str, str] = Field(default_factory=dict)
    notes: list[str] = Field(default_factory=list)

    def certify(self, name: str, passed: bool | None, residual: str = "") -> bool:
        """Record a certificate; None means inconclusive."""
        status: Status = "inconclusive" if passed is None else ("pass" if passed else "fail")
        self.certificates.append(Certificate(name=name, status=status, residual=residual))
        return bool(passed)

    @property
    def status(self) -> Status:
        statuses = {c.status for c in self.certificates}
        if "fail" in statuses:
            return "fail"
        if "inconclusive" in statuses:
            return "inconclusive"
        return "pass"

    def exit_code(self) -> int:
        return {"pass": 0, "fail": 1, "inconclusive": 3}[self.status]

    def merge(self, other: "Report", prefix: str) -> None:
        """Fold a sub-report in, prefixing its names."""
        for c in other.certificates:
            self.certificates.append(Certificate(name=f"{prefix}{c.name}", status=c.status, residual=c.residual))
        for k, v in other.values.items():
            self.values[f"{prefix}{k}"] = v
        self.notes.extend(f"{prefix}{n}" for n in other.notes)


def emit_report(report: Report, fmt: str = "json") -> bytes:
    """Byte-identical output for identical reports."""
    if fmt == "json":
        text = json.dumps(report.model_dump(mode="json"), sort_keys=True, indent=2, ensure_ascii=False)
        return (text + "\n").encode("utf-8")
    if fmt == "text":
        lines = [f"task: {report.task}", f"status: {report.status}"]
        for k in sorted(report.inputs):
            lines.append(f"input {k}: {report.inputs[k]}")
        for c in report.certificates:
            lines.append(f"[{c.status}] {c.name}" + (f" -- {c.residual}" if c.residual else ""))
        for k in sorted(report.values):
            lines.append(f"{k} = {report.values[k]}")
        for n in report.notes:
            lines.append(f"note: {n}")
        return ("\n".join(lines) + "\n").encode("utf-8")
    raise ValueError(f"unknown report format {fmt!r}")


def load_report(data: bytes | str) -> Report:
    return Report.model_validate_json(data)


def report_schema() -> dict:
    return Report.model_json_schema()

"""Bit-stable CSV/JSON serialization of suite results.

Field order is fixed, rationals are written as ``"num/den"``, floats with
``repr`` (shortest round-trip form, locale independent) and nothing depends
on the clock.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

SCHEMA_PATH = Path(__file__).with_name("schemas") / "report.schema.json"
CHECK_COLUMNS = ("check", "expected", "comparator", "tolerance", "observed", "pass")


def render(value) -> str:
    """Text form of a scalar for reports."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return ""
    if isinstance(value, (tuple, list)):
        return " ".join(render(v) for v in value)
    return str(value)


@dataclass
class CheckResult:
    check: str
    expected: str
    comparator: str
    tolerance: str
    observed: str
    passed: bool

    def as_row(self) -> list[str]:
        return [self.check, self.expected, self.comparator, self.tolerance, self.observed, render(self.passed)]


@dataclass
class Report:
    suite: str
    spec: dict
    seed: int
    depth: int
    trials: int
    version: str
    columns: list[str]
    rows: list[list[str]] = field(default_factory=list)
    checks: list[CheckResult] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add_row(self, values) -> None:
        if len(values) != len(self.columns):
            raise ValueError(f"row has {len(values)} fields, table has {len(self.columns)}")
        self.rows.append([render(v) for v in values])

    def to_json_dict(self) -> dict:
        return {
            "suite": self.suite,
            "tool_version": self.version,
            "spec": self.spec,
            "seed": f"0x{self.seed:X}",
            "depth": self.depth,
            "trials": self.trials,
            "passed": self.passed,
            "columns": list(self.columns),
            "rows": [dict(zip(self.columns, r)) for r in self.rows],
            "checks": [dict(zip(CHECK_COLUMNS, c.as_row())) for c in self.checks],
            "notes": list(self.notes),
        }


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def report_csv(report: Report) -> tuple[str, str]:
    """The data table and the check table."""
    return _csv_text(report.columns, report.rows), _csv_text(CHECK_COLUMNS, [c.as_row() for c in report.checks])


def report_json(report: Report) -> str:
    return json.dumps(report.to_json_dict(), indent=2, sort_keys=False) + "\n"


def checks_path(path: Path) -> Path:
    return path.with_name(path.stem + ".checks.csv")


def emit_report(report: Report, fmt: str, path: str | Path) -> list[Path]:
    """Write the report; CSV goes to ``path`` plus a sibling ``<stem>.checks.csv``."""
    path = Path(path)
    try:
        if fmt == "json":
            path.write_text(report_json(report))
            return [path]
        if fmt == "csv":
            table, checks = report_csv(report)
            path.write_text(table)
            checks_path(path).write_text(checks)
            return [path, checks_path(path)]
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc
    raise ValueError(f"unknown format {fmt!r}")


def load_schema() -> dict:
    return json.loads(SCHEMA_PATH.read_text())

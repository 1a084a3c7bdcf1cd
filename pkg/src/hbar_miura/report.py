"""Check reports and their JSON / Markdown renderings."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from gmpy2 import mpq, mpz

SCHEMA_VERSION = 1
ENGINE_VERSION = "0.1.0"


def jsonable(obj):
    """Convert nested results to JSON-friendly values (rationals become strings)."""
    if isinstance(obj, (Fraction, type(mpq()))):
        return str(obj) if obj.denominator != 1 else int(obj.numerator)
    if isinstance(obj, type(mpz())):
        return int(obj)
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (str, int, float, bool)) or obj is None:
        return obj
    return str(obj)


@dataclass
class CheckReport:
    """Outcome of one check.

    ``residual`` is ``"1"`` for a passing symbolic check, an empty list for a
    passing table check, and the offending data otherwise.
    """

    check: str
    mode: str
    passed: bool
    residual: object
    parameters: dict = field(default_factory=dict)
    formula: str = ""
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "mode": self.mode,
            "verdict": "pass" if self.passed else "fail",
            "residual": jsonable(self.residual),
            "parameters": jsonable(self.parameters),
            "formula": self.formula,
            "details": jsonable(self.details),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def residual_is_trivial(residual) -> bool:
    return residual in ("1", [], {}, 0, None)


@dataclass
class SuiteReport:
    config: dict
    checks: list[CheckReport]
    timing: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def payload(self) -> dict:
        """Deterministic part of the report (no timing)."""
        return {
            "schema": SCHEMA_VERSION,
            "engine": ENGINE_VERSION,
            "config": jsonable(self.config),
            "verdict": "pass" if self.passed else "fail",
            "checks": [c.to_dict() for c in self.checks],
        }

    def to_json(self) -> str:
        out = self.payload()
        out["timing"] = jsonable(self.timing)
        return json.dumps(out, indent=2, sort_keys=True)

    def to_markdown(self) -> str:
        lines = [
            "# Verification report",
            "",
            f"verdict: **{'pass' if self.passed else 'fail'}**, schema {SCHEMA_VERSION}, engine {ENGINE_VERSION}",
            "",
            "| check | mode | verdict | formula |",
            "|---|---|---|---|",
        ]
        for c in self.checks:
            formula = c.formula.replace("|", "\\|")
            lines.append(f"| {c.check} | {c.mode} | {'pass' if c.passed else 'FAIL'} | `{formula}` |")
        failing = [c for c in self.checks if not c.passed]
        for c in failing:
            lines += ["", f"## {c.check}", "", "```", json.dumps(jsonable(c.residual), indent=1)[:4000], "```"]
        return "\n".join(lines) + "\n"

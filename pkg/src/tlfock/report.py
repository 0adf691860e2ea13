"""Structured pass/fail records shared by all verification suites."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Any

SCHEMA_VERSION = "1"


@dataclass
class Check:
    """One residual compared against a tolerance (``value <= tolerance`` passes).

    Boolean checks pass ``value=None`` and set ``passed`` directly.
    """

    name: str
    value: float | None
    tolerance: float | None = None
    passed: bool | None = None
    provenance: str = ""
    note: str = ""

    def __post_init__(self):
        if self.passed is None:
            v = self.value
            self.passed = bool(v is not None and math.isfinite(v) and v <= self.tolerance)

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "value": _clean(self.value),
            "tolerance": _clean(self.tolerance),
            "passed": bool(self.passed),
            "provenance": self.provenance,
            "note": self.note,
        }


@dataclass
class Report:
    suite: str
    checks: list[Check] = field(default_factory=list)
    tables: dict[str, list[dict[str, Any]]] = field(default_factory=dict)
    constants: dict[str, Any] = field(default_factory=dict)
    conventions: dict[str, str] = field(default_factory=dict)
    status: str | None = None
    error: str | None = None

    def add(self, check: Check) -> Check:
        self.checks.append(check)
        return check

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def passed(self) -> bool:
        return self.error is None and all(c.passed for c in self.checks)

    def to_dict(self) -> dict[str, Any]:
        status = self.status or ("pass" if self.passed else "fail")
        out = {
            "status": status,
            "checks": [c.to_dict() for c in self.checks],
            "tables": {k: [{kk: _clean(vv) for kk, vv in row.items()} for row in rows]
                       for k, rows in self.tables.items()},
            "constants": {k: _clean(v) for k, v in self.constants.items()},
            "conventions": dict(self.conventions),
        }
        if self.error is not None:
            out["error"] = self.error
        return out

    def summary_lines(self) -> list[str]:
        return [f"[{'PASS' if c.passed else 'FAIL'}] {self.suite}.{c.name}: "
                f"{_fmt(c.value)}{'' if c.tolerance is None else f' <= {c.tolerance:.1e}'}"
                for c in self.checks]


def _fmt(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.3e}"
    return str(v)


def _clean(v):
    """JSON-safe scalars: numpy numbers become Python ones, non-finite floats become strings."""
    if v is None or isinstance(v, (bool, str)):
        return v
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if hasattr(v, "item"):
        v = v.item()
    if isinstance(v, complex):
        return [_clean(v.real), _clean(v.imag)]
    if isinstance(v, int):
        return v
    v = float(v)
    if math.isfinite(v):
        return v
    return "inf" if v > 0 else ("-inf" if v < 0 else "nan")


def load_schema(name: str = "report") -> dict[str, Any]:
    text = resources.files("tlfock").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


def validate_report(doc: dict[str, Any]) -> None:
    """Raise ``jsonschema.ValidationError`` if ``doc`` violates the report schema."""
    import jsonschema

    jsonschema.validate(doc, load_schema("report"))

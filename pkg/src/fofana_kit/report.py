"""Outcome records shared by the condition checkers and the verification harness."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

PASS = "pass"
FAIL = "fail"
NOT_APPLICABLE = "not-applicable"
VACUOUS = "vacuous"
EXPERIMENTAL = "experimental"


@dataclass
class Row:
    case_id: str
    input_desc: str
    r: float | None
    lhs: float
    rhs: float
    ratio: float
    passed: bool = True

    def to_json(self) -> dict:
        return {
            "case_id": self.case_id,
            "input_desc": self.input_desc,
            "r": _num(self.r),
            "lhs": _num(self.lhs),
            "rhs": _num(self.rhs),
            "ratio": _num(self.ratio),
            "pass": self.passed,
        }


@dataclass
class CheckReport:
    """Result of one inequality or condition check.

    ``c_emp`` is always the largest row ratio. ``spread`` (max/min of the
    ratios) is filled in by the two-sided checks.
    """

    check_id: str
    rows: list[Row] = field(default_factory=list)
    cap: float = math.inf
    status: str = PASS
    spread: float | None = None
    refinement: dict | None = None
    skipped: int = 0
    notes: dict = field(default_factory=dict)

    @property
    def c_emp(self) -> float:
        return max((row.ratio for row in self.rows), default=math.nan)

    @property
    def c_min(self) -> float:
        return min((row.ratio for row in self.rows), default=math.nan)

    @property
    def passed(self) -> bool:
        return self.status == PASS

    @property
    def failed(self) -> bool:
        return self.status == FAIL

    def to_json(self) -> dict:
        return {
            "check_id": self.check_id,
            "status": self.status,
            "c_emp": _num(self.c_emp),
            "c_min": _num(self.c_min),
            "spread": _num(self.spread),
            "cap": _num(self.cap),
            "refinement": _clean(self.refinement),
            "skipped": self.skipped,
            "notes": _clean(self.notes),
            "rows": [row.to_json() for row in self.rows],
        }

    def summary(self) -> str:
        parts = [f"{self.check_id}: {self.status}", f"C_emp={self.c_emp:.6g}"]
        if self.spread is not None:
            parts.append(f"spread={self.spread:.6g}")
        if self.refinement and "drift" in self.refinement:
            parts.append(f"drift={self.refinement.get('drift', math.nan):.3g}")
        if self.skipped:
            parts.append(f"skipped={self.skipped}")
        return "  ".join(parts)


def _num(x):
    if x is None:
        return None
    x = float(x)
    if math.isnan(x):
        return None
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def _clean(obj):
    """JSON-safe copy: non-finite floats become strings or null."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, float):
        return _num(obj)
    return obj

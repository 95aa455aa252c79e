"""Structured results shared by the experiment modules and the CLI."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

__all__ = ["CheckResult", "ExperimentReport"]


@dataclass
class CheckResult:
    """One named pass/fail comparison with its target and tolerance."""

    name: str
    value: float
    target: Optional[float]
    tolerance: Optional[float]
    passed: bool
    detail: str = ""

    def describe(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        parts = [f"{status} {self.name}: value={self.value:.6g}"]
        if self.target is not None:
            parts.append(f"target={self.target:.6g}")
        if self.tolerance is not None:
            parts.append(f"tol={self.tolerance:.6g}")
        if self.detail:
            parts.append(self.detail)
        return " ".join(parts)


@dataclass
class ExperimentReport:
    """Rows destined for CSV plus scalar metrics and their checks."""

    name: str
    parameters: dict = field(default_factory=dict)
    row_fields: List[str] = field(default_factory=list)
    rows: List[dict] = field(default_factory=list)
    metrics: dict = field(default_factory=dict)
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add_check(self, name: str, value: float, *, target: Optional[float] = None,
                  tolerance: Optional[float] = None, passed: Optional[bool] = None,
                  detail: str = "") -> CheckResult:
        if passed is None:
            if target is None or tolerance is None:
                raise ValueError("either pass/fail or target+tolerance must be given")
            passed = abs(value - target) <= tolerance
        check = CheckResult(name, float(value), target, tolerance, bool(passed), detail)
        self.checks.append(check)
        return check

    def summary(self) -> dict:
        return {
            "experiment": self.name,
            "parameters": self.parameters,
            "metrics": self.metrics,
            "checks": [
                {
                    "name": c.name,
                    "value": c.value,
                    "target": c.target,
                    "tolerance": c.tolerance,
                    "passed": c.passed,
                    "detail": c.detail,
                }
                for c in self.checks
            ],
            "passed": self.passed,
        }

"""Check reports: which identities were tested, and the residuals of the ones that failed."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


@dataclass(frozen=True)
class Violation:
    identity: str
    where: str
    residual: str

    def to_dict(self) -> dict:
        return {"identity": self.identity, "where": self.where, "residual": self.residual}


@dataclass
class Report:
    """Outcome of a checker.

    Violations are content, not errors: a checker never raises on a failed
    identity, it records the offending residual here.
    """

    title: str
    checked: dict[str, int] = field(default_factory=dict)
    violations: list[Violation] = field(default_factory=list)
    notes: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.passed

    def count(self, identity: str, n: int = 1):
        self.checked[identity] = self.checked.get(identity, 0) + n

    def expect_zero(self, identity: str, where: str, residual) -> bool:
        """Record one evaluation of ``identity``; ``residual`` must be exactly zero."""
        self.count(identity)
        if _is_zero(residual):
            return True
        self.violations.append(Violation(identity, where, str(residual)))
        return False

    def failed(self, identity: str) -> list[Violation]:
        return [v for v in self.violations if v.identity == identity]

    def passed_identity(self, identity: str) -> bool:
        return self.checked.get(identity, 0) > 0 and not self.failed(identity)

    def merge(self, other: "Report", prefix: str = "") -> "Report":
        for k, n in other.checked.items():
            self.count(prefix + k, n)
        for v in other.violations:
            self.violations.append(Violation(prefix + v.identity, v.where, v.residual))
        return self

    def to_dict(self) -> dict:
        return {
            "title": self.title,
            "passed": self.passed,
            "checked": dict(sorted(self.checked.items())),
            "violations": [v.to_dict() for v in self.violations],
            **({"notes": self.notes} if self.notes else {}),
        }

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        lines = [f"{self.title}: {status} ({sum(self.checked.values())} evaluations)"]
        for v in self.violations:
            lines.append(f"  {v.identity} @ {v.where}: residual {v.residual}")
        return "\n".join(lines)


def _is_zero(value) -> bool:
    if hasattr(value, "is_zero"):
        return value.is_zero()
    return not value

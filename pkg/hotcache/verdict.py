"""Verification outcomes: violations are data, not exceptions."""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    location: Optional[str] = None

    def __str__(self) -> str:
        if self.location:
            return f"[{self.code}] {self.location}: {self.message}"
        return f"[{self.code}] {self.message}"


@dataclass
class Verdict:
    """Result of a verifier run.

    ``params`` carries whatever the verifier measured on the way (column
    star counts, label sets, scanned active sets), so a passing verdict
    doubles as a parameter report.
    """

    violations: List[Violation] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)
    params: Dict[str, Any] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, code: str, message: str, location: Optional[str] = None) -> None:
        self.violations.append(Violation(code, message, location))

    def extend(self, other: "Verdict", prefix: Optional[str] = None) -> None:
        for violation in other.violations:
            location = violation.location
            if prefix:
                location = f"{prefix}/{location}" if location else prefix
            self.violations.append(Violation(violation.code, violation.message, location))
        self.warnings.extend(other.warnings)
        self.notes.extend(other.notes)

    def codes(self) -> List[str]:
        return sorted({violation.code for violation in self.violations})

    def to_dict(self) -> Dict[str, Any]:
        return {
            "ok": self.ok,
            "violations": [
                {"code": v.code, "message": v.message, "location": v.location}
                for v in self.violations
            ],
            "warnings": list(self.warnings),
            "notes": list(self.notes),
            "params": self.params,
        }

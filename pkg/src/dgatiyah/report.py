from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class CheckReport:
    """Outcome of a verification: pass flag, witnesses of failure, computed data."""

    name: str
    passed: bool = True
    failures: list = field(default_factory=list)
    data: dict = field(default_factory=dict)

    def fail(self, witness) -> None:
        self.passed = False
        self.failures.append(witness)

    def __bool__(self):
        return self.passed

    def to_dict(self) -> dict:
        return {
            "check": self.name,
            "passed": self.passed,
            "failures": list(self.failures),
            "data": self.data,
        }

"""Small result containers shared by the checkers."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List


@dataclass
class CheckReport:
    """Outcome of one verification; violations carry residual expressions."""

    name: str
    passed: bool = True
    violations: List[Dict[str, Any]] = field(default_factory=list)
    details: Dict[str, Any] = field(default_factory=dict)

    def fail(self, **info):
        self.passed = False
        self.violations.append(info)

    def __bool__(self):
        return self.passed

    def to_dict(self) -> Dict[str, Any]:
        from .expression import print_expression

        def conv(v):
            if hasattr(v, "table"):
                return print_expression(v)
            if isinstance(v, dict):
                return {str(k): conv(x) for k, x in v.items()}
            if isinstance(v, (list, tuple)):
                return [conv(x) for x in v]
            if hasattr(v, "numerator") and not isinstance(v, int):
                return str(v)
            return v

        return {
            "check": self.name,
            "passed": self.passed,
            "violations": [conv(v) for v in self.violations],
            "details": conv(self.details),
        }


class StageError(Exception):
    """Wraps a failure raised inside one named pipeline stage."""

    def __init__(self, stage: str, error: Exception):
        self.stage = stage
        self.error = error
        super().__init__(f"[{stage}] {type(error).__name__}: {error}")

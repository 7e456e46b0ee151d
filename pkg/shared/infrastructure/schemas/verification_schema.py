from typing import Any, Dict, List, Literal, Optional

from pydantic import Field

from .base_schema import ReportSchema

CriterionStatus = Literal['passed', 'failed', 'skipped']


class CriterionResult(ReportSchema):
    """Итог одного критерия приёмки"""
    name: str
    status: CriterionStatus
    value: Optional[float] = None
    limit: Optional[float] = None
    details: Dict[str, Any] = Field(default_factory=dict)
    duration: float = 0.0


class VerificationReport(ReportSchema):
    criteria: List[CriterionResult] = Field(default_factory=list)

    def count(self, status: CriterionStatus) -> int:
        return sum(1 for c in self.criteria if c.status == status)

    @property
    def ok(self) -> bool:
        return self.count('failed') == 0

    def summary(self) -> Dict[str, Any]:
        return {
            'passed': self.count('passed'),
            'failed': self.count('failed'),
            'skipped': self.count('skipped'),
            'ok': self.ok,
        }

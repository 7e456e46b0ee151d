from .base_schema import BaseSchema, ReportSchema
from .verification_schema import CriterionResult, CriterionStatus, VerificationReport

__all__ = ['BaseSchema', 'ReportSchema', 'CriterionResult', 'CriterionStatus', 'VerificationReport']

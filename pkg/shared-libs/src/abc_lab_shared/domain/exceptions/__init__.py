"""
Domain Exceptions - ABC Lab Shared
Exceções específicas do domínio
"""

from .lab_exceptions import (
    DomainError,
    InfeasibleSeparation,
    KindMismatch,
    LabException,
    ResolutionExceeded,
    StageFailed,
    SupportTooLarge,
)

__all__ = [
    "LabException",
    "DomainError",
    "KindMismatch",
    "ResolutionExceeded",
    "InfeasibleSeparation",
    "SupportTooLarge",
    "StageFailed",
]

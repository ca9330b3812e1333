from typing import Any, Dict, List, Optional


class LabException(Exception):
    def __init__(
        self,
        error_code: str,
        error_message: str,
        stage: Optional[str] = None,
        details: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(error_message)
        self.error_code = error_code
        self.error_message = error_message
        self.stage = stage
        self.details = details or {}


class DomainError(LabException):
    def __init__(self, error_message: str, **kwargs):
        super().__init__(error_code="DOMAIN_ERROR", error_message=error_message, **kwargs)


class KindMismatch(LabException):
    def __init__(self, left: Any, right: Any):
        super().__init__(
            error_code="KIND_MISMATCH",
            error_message=f"Superfícies incompatíveis: {left} e {right}",
            details={"left": str(left), "right": str(right)},
        )


class ResolutionExceeded(LabException):
    def __init__(self, error_message: str, **kwargs):
        super().__init__(error_code="RESOLUTION_EXCEEDED", error_message=error_message, **kwargs)


class InfeasibleSeparation(LabException):
    def __init__(self, error_message: str, **kwargs):
        super().__init__(error_code="INFEASIBLE_SEPARATION", error_message=error_message, **kwargs)


class SupportTooLarge(LabException):
    def __init__(self, support_size: int, cap: int):
        super().__init__(
            error_code="SUPPORT_TOO_LARGE",
            error_message=f"Suporte combinado {support_size} excede o limite {cap}",
            details={"support_size": support_size, "cap": cap},
        )
        self.support_size = support_size
        self.cap = cap


class StageFailed(LabException):
    def __init__(self, condition_id: str, stage: int, ledger: Optional[List[Any]] = None, **kwargs):
        super().__init__(
            error_code="STAGE_FAILED",
            error_message=f"Estágio {stage} falhou na condição {condition_id}",
            stage=str(stage),
            **kwargs,
        )
        self.condition_id = condition_id
        self.stage_index = stage
        self.ledger = list(ledger or [])

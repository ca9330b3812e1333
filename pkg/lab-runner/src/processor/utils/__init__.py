"""
Utils Module - ABC Lab Runner
Tratamento de erros, escalonamento de tentativas e paralelismo
"""

from .error_handler import EXIT_ERROR, EXIT_OK, EXIT_STAGE_FAILED, ErrorCode, ErrorHandler, LabError
from .parallel import parallel_map
from .retry_handler import escalation_schedule, retry_with_escalation

__all__ = [
    "ErrorCode",
    "ErrorHandler",
    "LabError",
    "EXIT_OK",
    "EXIT_ERROR",
    "EXIT_STAGE_FAILED",
    "parallel_map",
    "escalation_schedule",
    "retry_with_escalation",
]

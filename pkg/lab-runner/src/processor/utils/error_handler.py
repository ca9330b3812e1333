import json
import logging
from enum import Enum
from typing import Any, Dict, Optional

from abc_lab_shared.domain.exceptions import (
    DomainError,
    InfeasibleSeparation,
    KindMismatch,
    LabException,
    ResolutionExceeded,
    StageFailed,
    SupportTooLarge,
)
from pydantic import ValidationError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_STAGE_FAILED = 2


class ErrorCode(Enum):
    CONFIG_ERROR = "CONFIG_ERROR"
    PARSE_ERROR = "PARSE_ERROR"
    SURFACE_MISMATCH = "SURFACE_MISMATCH"
    STAGE_FAILED = "STAGE_FAILED"
    DOMAIN_ERROR = "DOMAIN_ERROR"
    TRANSPORT_ERROR = "TRANSPORT_ERROR"
    RESOLUTION_ERROR = "RESOLUTION_ERROR"
    UNKNOWN_ERROR = "UNKNOWN_ERROR"


class LabError(Exception):
    def __init__(
        self,
        message: str,
        error_code: ErrorCode = ErrorCode.UNKNOWN_ERROR,
        details: Optional[Dict[str, Any]] = None,
        original_error: Optional[Exception] = None,
    ):
        super().__init__(message)
        self.message = message
        self.error_code = error_code
        self.details = details or {}
        self.original_error = original_error


class ErrorHandler:
    @staticmethod
    def categorize_error(error: Exception) -> ErrorCode:
        if isinstance(error, LabError):
            return error.error_code
        if isinstance(error, StageFailed):
            return ErrorCode.STAGE_FAILED
        if isinstance(error, KindMismatch):
            return ErrorCode.SURFACE_MISMATCH
        if isinstance(error, SupportTooLarge):
            return ErrorCode.TRANSPORT_ERROR
        if isinstance(error, (ResolutionExceeded, InfeasibleSeparation)):
            return ErrorCode.RESOLUTION_ERROR
        if isinstance(error, DomainError):
            return ErrorCode.DOMAIN_ERROR
        if isinstance(error, ValidationError):
            return ErrorCode.CONFIG_ERROR
        if isinstance(error, (json.JSONDecodeError, UnicodeDecodeError)):
            return ErrorCode.PARSE_ERROR
        if isinstance(error, (FileNotFoundError, IsADirectoryError)):
            return ErrorCode.PARSE_ERROR

        error_str = str(error).lower()
        if "config" in error_str or "validation" in error_str:
            return ErrorCode.CONFIG_ERROR
        elif "json" in error_str or "parse" in error_str or "campo" in error_str:
            return ErrorCode.PARSE_ERROR
        else:
            return ErrorCode.UNKNOWN_ERROR

    @staticmethod
    def describe_error(error: Exception) -> str:
        """Mensagem curta com linha (JSON) ou caminho do campo (schema)."""
        if isinstance(error, json.JSONDecodeError):
            return f"JSON inválido na linha {error.lineno}, coluna {error.colno}: {error.msg}"
        if isinstance(error, ValidationError):
            problems = []
            for item in error.errors():
                location = ".".join(str(part) for part in item.get("loc", ())) or "<raiz>"
                problems.append(f"{location}: {item.get('msg')}")
            return "Configuração inválida: " + "; ".join(problems)
        if isinstance(error, LabException):
            return error.error_message
        if isinstance(error, LabError):
            return error.message
        return str(error)

    @staticmethod
    def create_error_response(
        error: Exception, command: Optional[str] = None, context: Optional[str] = None
    ) -> Dict[str, Any]:
        if isinstance(error, LabError):
            error_code = error.error_code
            message = error.message
            details = error.details
        else:
            error_code = ErrorHandler.categorize_error(error)
            message = ErrorHandler.describe_error(error)
            details = dict(getattr(error, "details", {}) or {})
            details["original_error"] = type(error).__name__

        error_response = {"error_code": error_code.value, "error_message": message, "error_details": details}

        if command:
            error_response["command"] = command

        if context:
            error_response["context"] = context

        logger.error(f"Resposta de erro criada: {error_response}")

        return error_response

    @staticmethod
    def exit_code_for(error: Optional[Exception]) -> int:
        if error is None:
            return EXIT_OK
        if ErrorHandler.categorize_error(error) is ErrorCode.STAGE_FAILED:
            return EXIT_STAGE_FAILED
        return EXIT_ERROR

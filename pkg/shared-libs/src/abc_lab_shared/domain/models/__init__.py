"""
Domain Models - ABC Lab Shared
Modelos de configuração, relatórios e ledgers
"""

from .ledger_models import IntervalModel, LedgerEntryModel, RationalModel, RunManifest, StageLedger
from .report_models import (
    EmergenceReport,
    ErgodicityReport,
    FactEmerResult,
    KickerCertificate,
    PropertyCheckResult,
    SeparationCertificate,
)
from .run_config import (
    CheckConfig,
    DiagnoseConfig,
    DiagnosticsConfig,
    ResolutionConfig,
    RunConfig,
    SchemeConfig,
    SeedConfig,
)

__all__ = [
    "RunConfig",
    "SeedConfig",
    "ResolutionConfig",
    "SchemeConfig",
    "DiagnosticsConfig",
    "DiagnoseConfig",
    "CheckConfig",
    "KickerCertificate",
    "SeparationCertificate",
    "ErgodicityReport",
    "EmergenceReport",
    "FactEmerResult",
    "PropertyCheckResult",
    "RationalModel",
    "LedgerEntryModel",
    "IntervalModel",
    "StageLedger",
    "RunManifest",
]

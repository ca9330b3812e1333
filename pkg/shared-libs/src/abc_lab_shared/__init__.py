"""
ABC Lab Shared Library
Biblioteca compartilhada do laboratório de esquemas de aproximação por conjugação em superfícies
"""

__version__ = "0.1.0"

from .domain.entities import (
    AnnulusPoint,
    DiscreteMeasure,
    MapExpr,
    PointCloud,
    SchemeState,
    SurfacePoint,
    TransportPlan,
)
from .domain.enums import RunMode, SchemeMode, SurfaceKind
from .domain.exceptions import (
    DomainError,
    InfeasibleSeparation,
    KindMismatch,
    LabException,
    ResolutionExceeded,
    StageFailed,
    SupportTooLarge,
)
from .domain.models import RunConfig, RunManifest, StageLedger
from .mappers import MapExprMapper, MeasureMapper, ReportMapper

__all__ = [
    # Entities
    "AnnulusPoint",
    "SurfacePoint",
    "PointCloud",
    "DiscreteMeasure",
    "TransportPlan",
    "MapExpr",
    "SchemeState",
    # Enums
    "SurfaceKind",
    "SchemeMode",
    "RunMode",
    # Exceptions
    "LabException",
    "DomainError",
    "KindMismatch",
    "ResolutionExceeded",
    "InfeasibleSeparation",
    "SupportTooLarge",
    "StageFailed",
    # Models
    "RunConfig",
    "RunManifest",
    "StageLedger",
    # Mappers
    "MapExprMapper",
    "MeasureMapper",
    "ReportMapper",
]

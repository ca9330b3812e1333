"""
Domain Entities - ABC Lab Shared
Entidades do domínio: pontos, medidas, expressões de mapas e estados de esquema
"""

from .discrete_measure import DiscreteMeasure, TransportPlan
from .map_expr import (
    BoxExchange,
    BoxExchangeSpec,
    Compose,
    Conjugate,
    Identity,
    Inverse,
    MapExpr,
    Rotation,
    box_exchanges,
    conjugated_rotation,
    reduce_rotation,
)
from .scheme_state import (
    Interval,
    IntervalLedger,
    LedgerEntry,
    SchemeState,
    emergence_epsilon,
    ergodic_epsilon,
    separation_delta,
)
from .surface_point import AnnulusPoint, PointCloud, SurfacePoint, wrap_unit

__all__ = [
    "AnnulusPoint",
    "SurfacePoint",
    "PointCloud",
    "wrap_unit",
    "DiscreteMeasure",
    "TransportPlan",
    "MapExpr",
    "Identity",
    "Rotation",
    "BoxExchange",
    "BoxExchangeSpec",
    "Compose",
    "Inverse",
    "Conjugate",
    "conjugated_rotation",
    "box_exchanges",
    "reduce_rotation",
    "SchemeState",
    "LedgerEntry",
    "Interval",
    "IntervalLedger",
    "separation_delta",
    "ergodic_epsilon",
    "emergence_epsilon",
]

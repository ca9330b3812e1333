"""
Mappers - ABC Lab Shared
Codecs JSON/CSV para mapas, medidas, planos e ledgers
"""

from .map_expr_mapper import MapExprMapper
from .measure_mapper import MeasureMapper
from .report_mapper import ReportMapper, to_plain

__all__ = [
    "MapExprMapper",
    "MeasureMapper",
    "ReportMapper",
    "to_plain",
]

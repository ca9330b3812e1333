"""
Domain Enums - ABC Lab Shared
Enumerações do laboratório
"""

from .surface_kind_enum import RunMode, SchemeMode, SurfaceKind

__all__ = [
    "RunMode",
    "SchemeMode",
    "SurfaceKind",
]

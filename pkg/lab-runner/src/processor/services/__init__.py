"""
Services - ABC Lab Runner
Mapas, kickers, transporte ótimo, separação, diagnósticos e suíte de propriedades
"""

from .diagnostics_service import DiagnosticsService, emergence_lower_bound
from .kicker_service import KickerService
from .map_service import MapService
from .profile_cache_service import ProfileCacheService
from .property_suite_service import PropertySuiteService
from .separation_service import SeparationService
from .transport_service import TransportService

__all__ = [
    "MapService",
    "TransportService",
    "ProfileCacheService",
    "SeparationService",
    "KickerService",
    "DiagnosticsService",
    "PropertySuiteService",
    "emergence_lower_bound",
]

import logging
import math
from typing import List, Optional, Tuple

import numpy as np
from abc_lab_shared.domain.entities import DiscreteMeasure, MapExpr
from abc_lab_shared.domain.exceptions import InfeasibleSeparation
from abc_lab_shared.geometry import midpoint_grid, mu_y_measure

from src.app.config import settings
from src.processor.services.profile_cache_service import ProfileCacheService
from src.processor.services.transport_service import TransportService

logger = logging.getLogger(__name__)


def separation_threshold(eta: float, eps_prime: float, scale: float = 1.0) -> float:
    """3·exp(-(η/λ)^(-2+ε'))."""
    return 3.0 * math.exp(-((eta / scale) ** (-2.0 + eps_prime)))


class SeparationService:
    def __init__(
        self,
        transport_service: TransportService,
        cache: Optional[ProfileCacheService] = None,
        y_grid: Optional[int] = None,
        eta_grid: Optional[int] = None,
        measure_support: Optional[int] = None,
        eta_floor: Optional[float] = None,
    ):
        self.transport_service = transport_service
        self.cache = cache or ProfileCacheService()
        self.y_grid = y_grid or settings.Y_GRID
        self.eta_grid = eta_grid or settings.ETA_GRID
        self.measure_support = measure_support or settings.MEASURE_SUPPORT
        self.eta_floor = eta_floor or settings.ETA_GRID_FLOOR

    def pushed_circles(self, h: MapExpr, y_values: np.ndarray, m: int) -> List[DiscreteMeasure]:
        return [self.transport_service.pushforward(h, mu_y_measure(y, h.kind, m)) for y in y_values]

    def separation_profile(
        self, h: MapExpr, y_grid: Optional[int] = None, m: Optional[int] = None, order: int = 1
    ) -> Tuple[np.ndarray, np.ndarray]:
        """Matriz y × y' de d_K(h_*μ_y, h_*μ_y') nas grades de pontos médios e os valores de y."""
        y_grid = y_grid or self.y_grid
        m = m or self.measure_support
        y_values = midpoint_grid(y_grid)

        key = {"map": ProfileCacheService.fingerprint(h), "y_grid": y_grid, "m": m, "order": order}
        cached = self.cache.get("separation_profile", **key)
        if cached is not None:
            return cached, y_values

        logger.info(f"Calculando perfil de separação: {y_grid} linhas, suporte {m}, simetria {order}")
        matrix = self.transport_service.pairwise_matrix(self.pushed_circles(h, y_values, m), order=order)
        self.cache.set("separation_profile", matrix, **key)
        return matrix, y_values

    def separation_mass(
        self, h: MapExpr, y: float, eta: float, y_grid: Optional[int] = None, m: Optional[int] = None
    ) -> float:
        """Fração da grade y' com d_K(h_*μ_y, h_*μ_y') ≤ η."""
        if not -1.0 < y < 1.0:
            raise ValueError(f"y fora de (-1, 1): {y}")
        y_grid = y_grid or self.y_grid
        m = m or self.measure_support

        base = self.transport_service.pushforward(h, mu_y_measure(y, h.kind, m))
        others = self.pushed_circles(h, midpoint_grid(y_grid), m)
        distances = self.transport_service.distances_to(others, base)
        return float(np.mean(distances <= eta))

    def eta_candidates(self, upper: float = 1.0, count: Optional[int] = None) -> np.ndarray:
        count = count or self.eta_grid
        return np.geomspace(min(self.eta_floor, upper), upper, count)

    @staticmethod
    def row_masses(matrix: np.ndarray, rows: np.ndarray, eta: float) -> np.ndarray:
        return np.mean(matrix[rows] <= eta, axis=1)

    @staticmethod
    def interior_rows(y_values: np.ndarray, eps_prime: float) -> np.ndarray:
        """Linhas com |y| < 1 - ε'; se 𝕀_ε' não contém nenhuma linha da grade, as linhas centrais."""
        rows = np.flatnonzero(np.abs(y_values) < 1.0 - eps_prime)
        if rows.size == 0:
            logger.debug(f"𝕀_ε' vazio na grade para ε'={eps_prime:.4g}, usando as linhas centrais")
            center = np.abs(y_values).min()
            rows = np.flatnonzero(np.isclose(np.abs(y_values), center))
        return rows

    def eta_of(
        self,
        h: MapExpr,
        eps_prime: float,
        y_grid: Optional[int] = None,
        eta_grid: Optional[int] = None,
        m: Optional[int] = None,
        threshold_scale: float = 1.0,
    ) -> float:
        """Menor η' da grade geométrica com massa ≤ 3·exp(-η'^(-2+ε')) em toda linha de 𝕀_ε'."""
        if not 0.0 < eps_prime < 2.0:
            raise ValueError(f"eps_prime fora de (0, 2): {eps_prime}")

        matrix, y_values = self.separation_profile(h, y_grid, m)
        rows = self.interior_rows(y_values, eps_prime)

        for eta in self.eta_candidates(count=eta_grid):
            worst = float(self.row_masses(matrix, rows, eta).max())
            if worst <= separation_threshold(eta, eps_prime, threshold_scale):
                logger.debug(f"eta_of(ε'={eps_prime:.4g}) = {eta:.6g} com massa máxima {worst:.4g}")
                return float(eta)
        return 1.0

    def measured_separation(
        self, matrix: np.ndarray, y_values: np.ndarray, eps0: float, eta0: float, colors: int
    ) -> Tuple[float, np.ndarray, np.ndarray]:
        """Maior η ≤ η₀ da grade com massa(3η) ≤ 1/colors em toda linha de 𝕀_ε₀."""
        rows = self.interior_rows(y_values, eps0)
        for eta in self.eta_candidates(upper=eta0)[::-1]:
            masses = self.row_masses(matrix, rows, 3.0 * eta)
            if masses.max() <= 1.0 / colors:
                return float(eta), y_values[rows], masses

        raise InfeasibleSeparation(
            f"Nenhum η ≤ {eta0} separa as cores: massa mínima {self.row_masses(matrix, rows, 0.0).max():.4g} "
            f"> 1/{colors}",
            details={"eta0": eta0, "colors": colors},
        )

    @staticmethod
    def region_y_values(eps: float, count: int) -> np.ndarray:
        return midpoint_grid(count, -1.0 + eps, 1.0 - eps)

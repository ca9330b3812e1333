import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from abc_lab_shared.domain.entities import MapExpr, SchemeState, conjugated_rotation
from abc_lab_shared.domain.enums import SurfaceKind
from abc_lab_shared.domain.exceptions import SupportTooLarge
from abc_lab_shared.domain.models import EmergenceReport, ErgodicityReport, FactEmerResult
from abc_lab_shared.geometry import chart_sample, lebesgue_sample, region_mask, stream_rng, to_surface

from src.processor.services.separation_service import SeparationService
from src.processor.services.transport_service import TransportService
from src.processor.utils.parallel import parallel_map

logger = logging.getLogger(__name__)


def emergence_lower_bound(eta_n: float, eps_prev: float, eps_n: float) -> float:
    """(1 - ε_{n-1})·log|η_n^(-2+ε_{n-1}) - log(3+ε_n)| / (-log(η_n/2))."""
    gap = abs(eta_n ** (-2.0 + eps_prev) - math.log(3.0 + eps_n))
    if gap == 0.0:
        return float("-inf")
    return (1.0 - eps_prev) * math.log(gap) / (-math.log(eta_n / 2.0))


def emergence_integrands(masses: np.ndarray, scale: float, samples: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Massas truncadas em [1/n, 1 - 1/n], integrandos log|log m| / |log ε| e a marcação das truncadas."""
    low, high = 1.0 / samples, 1.0 - 1.0 / samples
    floored = (masses <= low) | (masses >= high)
    clipped = np.clip(masses, low, high)
    return clipped, np.log(np.abs(np.log(clipped))) / abs(math.log(scale)), floored


class DiagnosticsService:
    def __init__(self, transport_service: TransportService, separation_service: SeparationService):
        self.transport_service = transport_service
        self.separation_service = separation_service
        self.map_service = transport_service.map_service

    def ergodicity_report(
        self,
        f: MapExpr,
        q: int,
        region_eta: float,
        samples: int,
        resolution: int,
        seed: int,
        threshold: Optional[float] = None,
        h: Optional[MapExpr] = None,
    ) -> ErgodicityReport:
        """d_K(e^f_q(x), Leb_grid) para x amostrado em h(𝕄_η), ou em 𝕄_η quando h não é dado."""
        if q > self.transport_service.support_cap:
            raise SupportTooLarge(q, self.transport_service.support_cap)

        theta, y = chart_sample(stream_rng(seed, "ergodicity"), samples, eta=region_eta)
        points = to_surface(theta, y, f.kind)
        if h is not None:
            points = self.map_service.evaluate_coords(h, points)
        measures = self.transport_service.orbit_measures(f, points, q)
        results = parallel_map(
            lambda mu: self.transport_service.kantorovich_to_lebesgue(mu, resolution),
            measures,
            threads=self.transport_service.threads,
        )
        distances = np.array([value for value, _ in results])
        radius = max(r for _, r in results)

        fraction = None if threshold is None else float(np.mean(distances <= threshold))
        logger.info(
            f"Ergodicidade q={q}: máx {distances.max():.4g}, média {distances.mean():.4g}, raio {radius:.3g}"
        )
        return ErgodicityReport(
            q=q,
            region_eta=region_eta,
            resolution=resolution,
            radius=radius,
            distances=distances.tolist(),
            max_distance=float(distances.max()),
            mean_distance=float(distances.mean()),
            threshold=threshold,
            fraction_below=fraction,
            conjugated_region=h is not None,
        )

    def orbit_distance_matrix(self, f: MapExpr, q: int, samples: int, seed: int) -> np.ndarray:
        cloud = lebesgue_sample(f.kind, samples, seed)
        return self.transport_service.pairwise_matrix(self.transport_service.orbit_measures(f, cloud.coords, q))

    def reports_from_matrix(self, matrix: np.ndarray, q: int, scales: Sequence[float]) -> List[EmergenceReport]:
        samples = matrix.shape[0]
        reports = []
        for scale in scales:
            if not 0.0 < scale < 1.0:
                raise ValueError(f"Escala fora de (0, 1): {scale}")
            masses, integrands, floored = emergence_integrands(np.mean(matrix <= scale, axis=1), scale, samples)
            reports.append(
                EmergenceReport(
                    eps=scale,
                    q=q,
                    samples=samples,
                    masses=masses.tolist(),
                    integrands=integrands.tolist(),
                    floored=floored.tolist(),
                    mean_integrand=float(np.mean(integrands)),
                    slack=math.log(abs(math.log(1.0 / samples))) / abs(math.log(scale)),
                )
            )
        return reports

    def emergence_order_estimate(
        self, f: MapExpr, q: int, scales: Sequence[float], samples: int, seed: int
    ) -> List[EmergenceReport]:
        """Massas das bolas B(e_i, ε) na matriz de d_K entre e^f_q(x_i), x_i ~ Leb, para cada escala."""
        matrix = self.orbit_distance_matrix(f, q, samples, seed)
        reports = self.reports_from_matrix(matrix, q, scales)
        for report in reports:
            logger.info(f"Emergência ε={report.eps:.4g}: integrando médio {report.mean_integrand:.4g}")
        return reports

    def fact_emer_check(
        self, state: SchemeState, h_limit: MapExpr, samples: int, reference_samples: int, seed: int
    ) -> FactEmerResult:
        """Massa de {x' : d_K(e^f(x), e^f(x')) ≤ η_n/2} para x em h(𝕄_{ε_{n-1}}) contra (3+ε_n)·δ_n."""
        if state.eta is None or state.delta is None or state.eps_prev is None:
            raise ValueError("Estado sem η, δ ou ε anterior; exige um estágio de emergência")

        f = conjugated_rotation(h_limit, state.alpha)
        theta, y = chart_sample(stream_rng(seed, "fact_emer"), samples, eta=state.eps_prev)
        region_points = self.map_service.evaluate_coords(h_limit, to_surface(theta, y, h_limit.kind))
        reference = lebesgue_sample(h_limit.kind, reference_samples, seed)

        sources = self.transport_service.orbit_measures(f, region_points, state.q)
        targets = self.transport_service.orbit_measures(f, reference.coords, state.q)
        scale = state.eta / 2.0

        def ball_mass(mu) -> float:
            return float(np.mean(self.transport_service.distances_to(targets, mu) <= scale))

        masses = np.array(parallel_map(ball_mass, sources, threads=self.transport_service.threads))
        bound = (3.0 + state.eps) * state.delta
        slack = 1.0 / math.sqrt(reference_samples)
        passed = bool(masses.max() <= bound + slack)
        logger.info(
            f"Verificação de emergência no estágio {state.n}: massa máxima {masses.max():.4g}, "
            f"limite {bound:.4g} + {slack:.3g}"
        )
        return FactEmerResult(
            stage=state.n,
            eta=state.eta,
            delta=state.delta,
            eps=state.eps,
            scale=scale,
            bound=bound,
            slack=slack,
            masses=masses.tolist(),
            max_mass=float(masses.max()),
            passed=passed,
        )

    def separation_profile(self, h: MapExpr, y_grid: int, m: int) -> Tuple[np.ndarray, np.ndarray]:
        return self.separation_service.separation_profile(h, y_grid, m)

    def full_measure_fraction(
        self, conjugacies: Sequence[Tuple[MapExpr, float]], kind: SurfaceKind, samples: int, seed: int
    ) -> float:
        """Fração de pontos de Leb em h_k(𝕄_{ε_k}) para todos os pares (h_k, ε_k) registrados."""
        points = lebesgue_sample(kind, samples, seed).coords
        inside = np.ones(samples, dtype=bool)
        for h, eps in conjugacies:
            inside &= region_mask(self.map_service.evaluate_coords(h, points, inverse=True), kind, eps)
        return float(inside.mean())

import logging
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np
import ot
from abc_lab_shared.domain.entities import DiscreteMeasure, MapExpr, Rotation, SurfacePoint, TransportPlan
from abc_lab_shared.domain.exceptions import KindMismatch, SupportTooLarge
from abc_lab_shared.geometry import (
    grid_cell_index,
    lebesgue_grid,
    pairwise_distances,
    to_chart,
    to_surface,
)

from src.app.config import settings
from src.processor.services.map_service import MapService
from src.processor.utils.parallel import parallel_map

logger = logging.getLogger(__name__)

# Casas decimais usadas para identificar átomos repetidos após o dobramento por simetria
FOLD_DECIMALS = 12


def merge_atoms(measure: DiscreteMeasure) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Pontos únicos, pesos somados e o índice do ponto único de cada átomo original."""
    unique_points, inverse = np.unique(measure.points, axis=0, return_inverse=True)
    inverse = inverse.ravel()
    weights = np.bincount(inverse, weights=measure.weights, minlength=unique_points.shape[0])
    return unique_points, weights, inverse


def _groups(inverse: np.ndarray, size: int) -> List[np.ndarray]:
    order = np.argsort(inverse, kind="stable")
    return np.split(order, np.cumsum(np.bincount(inverse, minlength=size))[:-1])


class TransportService:
    def __init__(
        self,
        map_service: Optional[MapService] = None,
        support_cap: Optional[int] = None,
        solver_max_iter: Optional[int] = None,
        threads: Optional[int] = None,
    ):
        self.map_service = map_service or MapService()
        self.support_cap = support_cap or settings.SUPPORT_CAP
        self.solver_max_iter = solver_max_iter or settings.SOLVER_MAX_ITER
        self.threads = threads

    def pushforward(self, f: MapExpr, mu: DiscreteMeasure) -> DiscreteMeasure:
        if f.kind is not mu.kind:
            raise KindMismatch(f.kind, mu.kind)
        return DiscreteMeasure(mu.kind, self.map_service.evaluate_coords(f, mu.points), mu.weights.copy())

    def empirical_measure(self, f: MapExpr, x: SurfacePoint, n: int, merge: bool = False) -> DiscreteMeasure:
        """e^f_n(x): n átomos de peso 1/n em f(x), ..., fⁿ(x)."""
        if f.kind is not x.kind:
            raise KindMismatch(f.kind, x.kind)
        atoms = self.map_service.orbit_coords(f, x.coords, n)[0]
        measure = DiscreteMeasure(f.kind, atoms, np.full(n, 1.0 / n))
        return measure.merged() if merge else measure

    def orbit_measures(self, f: MapExpr, coords: np.ndarray, n: int) -> List[DiscreteMeasure]:
        """e^f_n para cada linha de coords, já com átomos repetidos somados."""
        orbits = self.map_service.orbit_coords(f, coords, n)
        weights = np.full(n, 1.0 / n)
        return [DiscreteMeasure(f.kind, orbit, weights).merged() for orbit in orbits]

    def _check_support(self, size: int) -> None:
        if size > self.support_cap:
            raise SupportTooLarge(size, self.support_cap)

    def _solve(self, a: np.ndarray, b: np.ndarray, cost: np.ndarray) -> np.ndarray:
        plan, log = ot.emd(a / a.sum(), b / b.sum(), cost, numItermax=self.solver_max_iter, log=True)
        if log.get("warning"):
            logger.warning(f"Solver de transporte: {log['warning']}")
        return plan

    def kantorovich(self, mu: DiscreteMeasure, nu: DiscreteMeasure) -> Tuple[float, TransportPlan]:
        """Valor exato de d_K(μ, ν) e um plano ótimo entre os átomos originais."""
        if mu.kind is not nu.kind:
            raise KindMismatch(mu.kind, nu.kind)

        mu_points, mu_weights, mu_inverse = merge_atoms(mu)
        nu_points, nu_weights, nu_inverse = merge_atoms(nu)
        self._check_support(mu_points.shape[0] + nu_points.shape[0])

        cost = pairwise_distances(mu.kind, mu_points, nu_points)
        merged_plan = self._solve(mu_weights, nu_weights, cost)
        value = float(np.sum(merged_plan * cost))

        mu_share = np.divide(
            mu.weights, mu_weights[mu_inverse], out=np.zeros(len(mu)), where=mu_weights[mu_inverse] > 0
        )
        nu_share = np.divide(
            nu.weights, nu_weights[nu_inverse], out=np.zeros(len(nu)), where=nu_weights[nu_inverse] > 0
        )
        mu_groups = _groups(mu_inverse, mu_points.shape[0])
        nu_groups = _groups(nu_inverse, nu_points.shape[0])

        sources, targets, masses = [], [], []
        for u, v in zip(*np.nonzero(merged_plan > 0)):
            src, tgt = np.meshgrid(mu_groups[u], nu_groups[v], indexing="ij")
            sources.append(src.ravel())
            targets.append(tgt.ravel())
            masses.append((merged_plan[u, v] * np.outer(mu_share[mu_groups[u]], nu_share[nu_groups[v]])).ravel())

        plan = TransportPlan(np.concatenate(sources), np.concatenate(targets), np.concatenate(masses), value)
        keep = plan.masses > 0
        return value, TransportPlan(plan.sources[keep], plan.targets[keep], plan.masses[keep], value)

    def kantorovich_value(self, mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
        if mu.kind is not nu.kind:
            raise KindMismatch(mu.kind, nu.kind)
        mu_points, mu_weights, _ = merge_atoms(mu)
        nu_points, nu_weights, _ = merge_atoms(nu)
        self._check_support(mu_points.shape[0] + nu_points.shape[0])
        cost = pairwise_distances(mu.kind, mu_points, nu_points)
        return float(np.sum(self._solve(mu_weights, nu_weights, cost) * cost))

    def kantorovich_to_lebesgue(self, mu: DiscreteMeasure, resolution: int) -> Tuple[float, float]:
        """d_K(μ, Leb_grid) e o raio r da grade; acima do limite de suporte μ é agrupado nas células (raio 2r)."""
        grid, radius = lebesgue_grid(mu.kind, resolution)
        self._check_support(len(grid) + 1)

        points, weights, _ = merge_atoms(mu)
        if points.shape[0] + len(grid) > self.support_cap:
            cells = grid_cell_index(points, mu.kind, resolution)
            binned = np.bincount(cells, weights=weights, minlength=len(grid))
            keep = binned > 0
            points, weights = grid.points[keep], binned[keep]
            radius *= 2.0
            logger.debug(f"Medida agrupada na grade de Lebesgue: {int(keep.sum())} células, raio {radius:.3e}")

        cost = pairwise_distances(mu.kind, points, grid.points)
        return float(np.sum(self._solve(weights, grid.weights, cost) * cost)), radius

    def conjugated_orbit_to_lebesgue(
        self, h: MapExpr, alpha: Fraction, point: np.ndarray, resolution: int, chunk: Optional[int] = None
    ) -> Tuple[float, float]:
        """d_K(e^f_q(x), Leb_grid) para f = h∘R_α∘h⁻¹, q = denominador de α; órbitas longas vão em blocos."""
        period = Fraction(alpha).denominator
        rotation = Rotation(h.kind, Fraction(alpha))
        grid, radius = lebesgue_grid(h.kind, resolution)
        point = np.atleast_2d(point)

        if period + len(grid) <= self.support_cap:
            atoms = self.map_service.conjugated_orbit(h, rotation, point, period)[0]
            measure = DiscreteMeasure(h.kind, atoms, np.full(period, 1.0 / period))
            return self.kantorovich_to_lebesgue(measure, resolution)

        chunk = chunk or settings.ORBIT_CHUNK
        counts = np.zeros(len(grid))
        for start in range(1, period + 1, chunk):
            count = min(chunk, period + 1 - start)
            atoms = self.map_service.conjugated_orbit(h, rotation, point, count, start=start)[0]
            counts += np.bincount(grid_cell_index(atoms, h.kind, resolution), minlength=len(grid))

        keep = counts > 0
        cost = pairwise_distances(h.kind, grid.points[keep], grid.points)
        value = float(np.sum(self._solve(counts[keep], grid.weights, cost) * cost))
        return value, 2.0 * radius

    def fold_measure(self, measure: DiscreteMeasure, order: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Representa uma medida R_{1/order}-invariante no domínio fundamental [0, 1/order) × 𝕀."""
        theta, y = to_chart(measure.points, measure.kind)
        folded = np.round(theta - np.floor(theta * order) / order, FOLD_DECIMALS)
        folded = np.where(folded >= 1.0 / order, 0.0, folded)
        chart = np.stack([folded, np.round(y, FOLD_DECIMALS)], axis=1)
        unique_chart, inverse = np.unique(chart, axis=0, return_inverse=True)
        weights = np.bincount(inverse.ravel(), weights=measure.weights, minlength=unique_chart.shape[0])
        return unique_chart[:, 0], unique_chart[:, 1], weights

    def symmetric_kantorovich(self, mu: DiscreteMeasure, nu: DiscreteMeasure, order: int) -> float:
        """d_K de medidas invariantes por R_{1/order} resolvido no quociente com custo min_j d(x, R_{j/order} x')."""
        if mu.kind is not nu.kind:
            raise KindMismatch(mu.kind, nu.kind)
        if order <= 1:
            return self.kantorovich_value(mu, nu)

        mu_theta, mu_y, mu_weights = self.fold_measure(mu, order)
        nu_theta, nu_y, nu_weights = self.fold_measure(nu, order)
        self._check_support(mu_theta.shape[0] + nu_theta.shape[0])

        left = to_surface(mu_theta, mu_y, mu.kind)
        cost = np.min(
            [
                pairwise_distances(mu.kind, left, to_surface(nu_theta + shift / order, nu_y, nu.kind))
                for shift in (-1, 0, 1)
            ],
            axis=0,
        )
        return float(np.sum(self._solve(mu_weights, nu_weights, cost) * cost))

    def pairwise_matrix(self, measures: Sequence[DiscreteMeasure], order: int = 1) -> np.ndarray:
        """Matriz simétrica de d_K com diagonal nula, calculada em paralelo sobre os pares i < j."""
        size = len(measures)
        pairs = list(zip(*np.triu_indices(size, k=1)))
        values = parallel_map(
            lambda pair: self.symmetric_kantorovich(measures[pair[0]], measures[pair[1]], order),
            pairs,
            threads=self.threads,
        )
        matrix = np.zeros((size, size))
        for (i, j), value in zip(pairs, values):
            matrix[i, j] = matrix[j, i] = value
        return matrix

    def distances_to(self, measures: Sequence[DiscreteMeasure], target: DiscreteMeasure, order: int = 1) -> np.ndarray:
        return np.array(
            parallel_map(lambda mu: self.symmetric_kantorovich(mu, target, order), list(measures), threads=self.threads)
        )

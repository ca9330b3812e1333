from typing import List, Optional, Sequence, Tuple

import numpy as np

from abc_lab_shared.domain.entities.surface_point import PointCloud, SurfacePoint
from abc_lab_shared.domain.enums import SurfaceKind
from abc_lab_shared.domain.exceptions import DomainError

WEIGHT_TOLERANCE = 1e-12


class DiscreteMeasure:
    def __init__(self, kind: SurfaceKind, points: np.ndarray, weights: Optional[np.ndarray] = None):
        cloud = PointCloud(kind, points)
        size = len(cloud)
        if size == 0:
            raise DomainError("Medida discreta sem átomos")

        if weights is None:
            weights = np.full(size, 1.0 / size)
        weights = np.asarray(weights, dtype=float)

        if weights.shape != (size,):
            raise DomainError(f"Pesos com shape {weights.shape} para {size} pontos")
        if np.any(weights < 0):
            raise DomainError("Pesos negativos na medida discreta")
        if abs(float(weights.sum()) - 1.0) > WEIGHT_TOLERANCE:
            raise DomainError(f"Pesos somam {weights.sum()!r}, esperado 1")

        self.kind = cloud.kind
        self.points = cloud.coords
        self.weights = weights

    @classmethod
    def from_points(
        cls, points: Sequence[SurfacePoint], weights: Optional[Sequence[float]] = None
    ) -> "DiscreteMeasure":
        cloud = PointCloud.from_points(points)
        return cls(cloud.kind, cloud.coords, None if weights is None else np.asarray(weights, dtype=float))

    @classmethod
    def dirac(cls, point: SurfacePoint) -> "DiscreteMeasure":
        return cls(point.kind, point.coords.reshape(1, -1), np.ones(1))

    def __len__(self) -> int:
        return self.points.shape[0]

    def support(self) -> PointCloud:
        return PointCloud(self.kind, self.points)

    def merged(self) -> "DiscreteMeasure":
        unique_points, inverse = np.unique(self.points, axis=0, return_inverse=True)
        if unique_points.shape[0] == len(self):
            return self
        merged_weights = np.bincount(inverse.ravel(), weights=self.weights, minlength=unique_points.shape[0])
        return DiscreteMeasure(self.kind, unique_points, merged_weights)


class TransportPlan:
    def __init__(self, sources: np.ndarray, targets: np.ndarray, masses: np.ndarray, objective: float):
        self.sources = np.asarray(sources, dtype=np.int64)
        self.targets = np.asarray(targets, dtype=np.int64)
        self.masses = np.asarray(masses, dtype=float)
        self.objective = float(objective)

    @classmethod
    def from_matrix(cls, plan: np.ndarray, objective: float) -> "TransportPlan":
        sources, targets = np.nonzero(plan > 0)
        return cls(sources, targets, plan[sources, targets], objective)

    def triples(self) -> List[Tuple[int, int, float]]:
        return [(int(i), int(j), float(m)) for i, j, m in zip(self.sources, self.targets, self.masses)]

    def __len__(self) -> int:
        return self.masses.shape[0]

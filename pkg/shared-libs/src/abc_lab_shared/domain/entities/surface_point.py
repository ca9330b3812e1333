from typing import Sequence, Tuple, Union

import numpy as np

from abc_lab_shared.domain.enums import SurfaceKind
from abc_lab_shared.domain.exceptions import DomainError

EMBEDDING_TOLERANCE = 1e-12


def wrap_unit(theta: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """Reduz ângulos a [0, 1)."""
    wrapped = np.mod(theta, 1.0)
    wrapped = np.where(wrapped >= 1.0, 0.0, wrapped)
    if np.ndim(wrapped) == 0:
        return float(wrapped)
    return wrapped


class AnnulusPoint:
    __slots__ = ("theta", "y")

    def __init__(self, theta: float, y: float):
        if not -1.0 - EMBEDDING_TOLERANCE <= y <= 1.0 + EMBEDDING_TOLERANCE:
            raise DomainError(f"Coordenada y fora de [-1, 1]: {y}")
        self.theta = wrap_unit(float(theta))
        self.y = min(1.0, max(-1.0, float(y)))

    def as_tuple(self) -> Tuple[float, float]:
        return (self.theta, self.y)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AnnulusPoint):
            return NotImplemented
        return self.theta == other.theta and self.y == other.y

    def __hash__(self) -> int:
        return hash(self.as_tuple())

    def __repr__(self) -> str:
        return f"AnnulusPoint(theta={self.theta!r}, y={self.y!r})"


class SurfacePoint:
    __slots__ = ("kind", "coords")

    def __init__(self, kind: SurfaceKind, coords: Sequence[float]):
        values = np.asarray(coords, dtype=float)
        kind = SurfaceKind(kind)

        if values.shape != (kind.ambient_dim,):
            raise DomainError(f"Ponto de {kind.value} exige {kind.ambient_dim} coordenadas, recebido {values.shape}")

        if kind is SurfaceKind.SPHERE and abs(float(values @ values) - 1.0) > EMBEDDING_TOLERANCE:
            raise DomainError(f"Ponto fora da esfera unitária: {values.tolist()}")
        if kind is SurfaceKind.DISK and float(values @ values) > 1.0 + EMBEDDING_TOLERANCE:
            raise DomainError(f"Ponto fora do disco unitário: {values.tolist()}")
        if kind is SurfaceKind.ANNULUS:
            if abs(values[1]) > 1.0 + EMBEDDING_TOLERANCE:
                raise DomainError(f"Coordenada y fora de [-1, 1]: {values[1]}")
            values = np.array([wrap_unit(values[0]), min(1.0, max(-1.0, values[1]))])

        values.setflags(write=False)
        self.kind = kind
        self.coords = values

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SurfacePoint):
            return NotImplemented
        return self.kind is other.kind and bool(np.array_equal(self.coords, other.coords))

    def __hash__(self) -> int:
        return hash((self.kind, self.coords.tobytes()))

    def __repr__(self) -> str:
        return f"SurfacePoint(kind={self.kind.value}, coords={self.coords.tolist()})"


class PointCloud:
    """Coleção vetorizada de pontos de uma mesma superfície."""

    def __init__(self, kind: SurfaceKind, coords: np.ndarray):
        kind = SurfaceKind(kind)
        array = np.asarray(coords, dtype=float)
        if array.ndim != 2 or array.shape[1] != kind.ambient_dim:
            raise DomainError(f"Nuvem de {kind.value} exige shape (n, {kind.ambient_dim}), recebido {array.shape}")
        self.kind = kind
        self.coords = array

    @classmethod
    def from_points(cls, points: Sequence[SurfacePoint]) -> "PointCloud":
        if not points:
            raise DomainError("Nuvem de pontos vazia")
        kind = points[0].kind
        if any(p.kind is not kind for p in points):
            raise DomainError("Nuvem de pontos com superfícies misturadas")
        return cls(kind, np.stack([p.coords for p in points]))

    def __len__(self) -> int:
        return self.coords.shape[0]


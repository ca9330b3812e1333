from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterator, Union

import numpy as np

from abc_lab_shared.domain.enums import SurfaceKind
from abc_lab_shared.domain.exceptions import KindMismatch

RotationNumber = Union[Fraction, float]


def reduce_rotation(alpha: RotationNumber) -> RotationNumber:
    """Número de rotação tomado módulo 1, preservando a forma exata quando racional."""
    if isinstance(alpha, Fraction):
        return alpha - (alpha.numerator // alpha.denominator)
    return float(alpha) % 1.0


@dataclass(frozen=True, eq=False)
class BoxExchangeSpec:
    n_theta: int
    n_y: int
    perm: np.ndarray
    q_equivariance: int = 1
    y_margin: float = 0.0

    def __post_init__(self):
        if self.n_theta < 1 or self.n_y < 1:
            raise ValueError(f"Grade inválida: n_theta={self.n_theta}, n_y={self.n_y}")
        if self.q_equivariance < 1 or self.n_theta % self.q_equivariance != 0:
            raise ValueError(f"q={self.q_equivariance} não divide n_theta={self.n_theta}")
        if not 0.0 <= self.y_margin < 1.0:
            raise ValueError(f"Margem inválida: {self.y_margin}")

        perm = np.array(self.perm, dtype=np.int64).reshape(-1)
        size = self.n_theta * self.n_y
        if perm.shape[0] != size:
            raise ValueError(f"Permutação com {perm.shape[0]} entradas para {size} caixas")
        if perm.min() < 0 or perm.max() >= size or np.any(np.bincount(perm, minlength=size) != 1):
            raise ValueError("Permutação não é uma bijeção das caixas")

        perm.setflags(write=False)
        object.__setattr__(self, "perm", perm)

        indices = np.arange(size, dtype=np.int64)
        if not np.array_equal(perm[self.column_shift(indices)], self.column_shift(perm)):
            raise ValueError(f"Permutação não comuta com a rotação R_1/{self.q_equivariance}")

    def column_shift(self, indices: np.ndarray) -> np.ndarray:
        shift = self.n_theta // self.q_equivariance
        rows, cols = np.divmod(indices, self.n_theta)
        return rows * self.n_theta + (cols + shift) % self.n_theta

    @cached_property
    def inverse_perm(self) -> np.ndarray:
        inverse = np.empty_like(self.perm)
        inverse[self.perm] = np.arange(self.perm.shape[0], dtype=np.int64)
        inverse.setflags(write=False)
        return inverse

    @property
    def band_low(self) -> float:
        return -1.0 + self.y_margin

    @property
    def band_high(self) -> float:
        return 1.0 - self.y_margin

    @property
    def row_height(self) -> float:
        return (self.band_high - self.band_low) / self.n_y

    @property
    def box_count(self) -> int:
        return self.n_theta * self.n_y

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BoxExchangeSpec):
            return NotImplemented
        return (
            self.n_theta == other.n_theta
            and self.n_y == other.n_y
            and self.q_equivariance == other.q_equivariance
            and self.y_margin == other.y_margin
            and bool(np.array_equal(self.perm, other.perm))
        )

    def __hash__(self) -> int:
        return hash((self.n_theta, self.n_y, self.q_equivariance, self.y_margin, self.perm.tobytes()))


@dataclass(frozen=True)
class MapExpr:
    kind: SurfaceKind

    def __matmul__(self, other: "MapExpr") -> "Compose":
        return Compose(self.kind, self, other)

    def inverse(self) -> "Inverse":
        return Inverse(self.kind, self)

    def walk(self) -> Iterator["MapExpr"]:
        yield self


@dataclass(frozen=True)
class Identity(MapExpr):
    pass


@dataclass(frozen=True)
class Rotation(MapExpr):
    alpha: RotationNumber = Fraction(0)

    @property
    def alpha_float(self) -> float:
        return float(reduce_rotation(self.alpha))


@dataclass(frozen=True)
class BoxExchange(MapExpr):
    spec: BoxExchangeSpec = field(default=None)

    def __post_init__(self):
        if self.spec is None:
            raise ValueError("BoxExchange exige uma especificação")


def _check_kinds(kind: SurfaceKind, *parts: MapExpr) -> None:
    for part in parts:
        if part.kind is not kind:
            raise KindMismatch(kind, part.kind)


@dataclass(frozen=True)
class Compose(MapExpr):
    outer: MapExpr = None
    inner: MapExpr = None

    def __post_init__(self):
        _check_kinds(self.kind, self.outer, self.inner)

    def walk(self) -> Iterator[MapExpr]:
        yield self
        yield from self.outer.walk()
        yield from self.inner.walk()


@dataclass(frozen=True)
class Inverse(MapExpr):
    base: MapExpr = None

    def __post_init__(self):
        _check_kinds(self.kind, self.base)

    def walk(self) -> Iterator[MapExpr]:
        yield self
        yield from self.base.walk()


@dataclass(frozen=True)
class Conjugate(MapExpr):
    conjugacy: MapExpr = None
    base: MapExpr = None

    def __post_init__(self):
        _check_kinds(self.kind, self.conjugacy, self.base)

    def walk(self) -> Iterator[MapExpr]:
        yield self
        yield from self.conjugacy.walk()
        yield from self.base.walk()


def conjugated_rotation(h: MapExpr, alpha: RotationNumber) -> Conjugate:
    return Conjugate(h.kind, h, Rotation(h.kind, alpha))


def box_exchanges(expr: MapExpr) -> Iterator[BoxExchangeSpec]:
    for node in expr.walk():
        if isinstance(node, BoxExchange):
            yield node.spec

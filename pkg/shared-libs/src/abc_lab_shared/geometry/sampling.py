import zlib
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np

from abc_lab_shared.domain.entities import DiscreteMeasure, PointCloud, SurfacePoint
from abc_lab_shared.domain.enums import SurfaceKind
from abc_lab_shared.geometry.metrics import pairwise_distances
from abc_lab_shared.geometry.projection import singular_mask, to_chart, to_surface


def stream_rng(seed: int, tag: Optional[str] = None) -> np.random.Generator:
    """Gerador determinístico; cada tag define um sub-fluxo independente da semente base."""
    base = int(seed) & 0xFFFFFFFF
    if tag is None:
        return np.random.default_rng(base)
    return np.random.default_rng(base ^ (zlib.crc32(tag.encode("utf-8")) & 0xFFFFFFFF))


def midpoint_grid(count: int, low: float = -1.0, high: float = 1.0) -> np.ndarray:
    step = (high - low) / count
    return low + step * (np.arange(count) + 0.5)


def chart_sample(rng: np.random.Generator, n: int, eta: float = 0.0) -> Tuple[np.ndarray, np.ndarray]:
    """Amostra uniforme de (θ, y) em 𝔸_η."""
    theta = rng.random(n)
    y = rng.uniform(-1.0 + eta, 1.0 - eta, n)
    return theta, y


def lebesgue_sample(kind: SurfaceKind, n: int, seed: int) -> PointCloud:
    if n < 1:
        raise ValueError("n deve ser ao menos 1")
    kind = SurfaceKind(kind)
    theta, y = chart_sample(stream_rng(seed), n)
    return PointCloud(kind, to_surface(theta, y, kind))


def mu_y_measure(y: float, kind: SurfaceKind, m: int) -> DiscreteMeasure:
    if m < 1:
        raise ValueError("m deve ser ao menos 1")
    kind = SurfaceKind(kind)
    theta = midpoint_grid(m, 0.0, 1.0)
    return DiscreteMeasure(kind, to_surface(theta, np.full(m, float(y)), kind), np.full(m, 1.0 / m))


def grid_shape(resolution: int) -> Tuple[int, int]:
    return resolution, max(1, resolution // 2)


def cell_radius(kind: SurfaceKind, n_theta: int, n_y: int, low: float = -1.0, high: float = 1.0) -> float:
    """Maior diâmetro de célula de uma grade n_theta x n_y em [low, high], calculado pelos cantos."""
    kind = SurfaceKind(kind)
    edges = np.linspace(low, high, n_y + 1)
    corner_theta = np.array([0.0, 1.0 / n_theta, 0.0, 1.0 / n_theta])
    radius = 0.0
    for bottom, top in zip(edges[:-1], edges[1:]):
        corners = to_surface(corner_theta, np.array([bottom, bottom, top, top]), kind)
        radius = max(radius, float(pairwise_distances(kind, corners, corners).max()))
    return radius


def grid_radius(kind: SurfaceKind, resolution: int) -> float:
    return cell_radius(kind, *grid_shape(resolution))


def chart_grid(kind: SurfaceKind, n_theta: int, n_y: int) -> DiscreteMeasure:
    """Pontos médios de uma grade n_theta x n_y no cilindro, com pesos iguais."""
    kind = SurfaceKind(kind)
    theta, y = np.meshgrid(midpoint_grid(n_theta, 0.0, 1.0), midpoint_grid(n_y), indexing="xy")
    size = n_theta * n_y
    return DiscreteMeasure(kind, to_surface(theta.ravel(), y.ravel(), kind), np.full(size, 1.0 / size))


@lru_cache(maxsize=32)
def lebesgue_grid(kind: SurfaceKind, resolution: int) -> Tuple[DiscreteMeasure, float]:
    """Discretização por pontos médios de Leb_𝕄 com pesos iguais e seu raio."""
    kind = SurfaceKind(kind)
    return chart_grid(kind, *grid_shape(resolution)), grid_radius(kind, resolution)


def chart_cell_index(coords: np.ndarray, kind: SurfaceKind, n_theta: int, n_y: int) -> np.ndarray:
    theta, y = to_chart(coords, kind)
    col = np.minimum((theta * n_theta).astype(np.int64), n_theta - 1)
    row = np.clip(((y + 1.0) / 2.0 * n_y).astype(np.int64), 0, n_y - 1)
    return row * n_theta + col


def grid_cell_index(coords: np.ndarray, kind: SurfaceKind, resolution: int) -> np.ndarray:
    """Índice da célula da grade de Lebesgue que contém cada ponto (mesma ordem de lebesgue_grid)."""
    return chart_cell_index(coords, kind, *grid_shape(resolution))


def region_mask(coords: np.ndarray, kind: SurfaceKind, eta: float) -> np.ndarray:
    coords = np.atleast_2d(coords)
    if eta == 0.0:
        return np.ones(coords.shape[0], dtype=bool)
    _, y = to_chart(coords, kind)
    return (np.abs(y) < 1.0 - eta) & ~singular_mask(coords, kind)


def in_region_M_eta(sp: SurfacePoint, eta: float) -> bool:
    if not 0.0 <= eta < 1.0:
        raise ValueError(f"eta fora de [0, 1): {eta}")
    return bool(region_mask(sp.coords, sp.kind, eta)[0])

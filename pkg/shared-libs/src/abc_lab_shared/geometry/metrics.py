import math

import numpy as np
from scipy.spatial.distance import cdist

from abc_lab_shared.domain.entities import SurfacePoint
from abc_lab_shared.domain.enums import SurfaceKind
from abc_lab_shared.domain.exceptions import KindMismatch

# d((θ,y),(θ',y')) = max(|θ-θ'|_T, |y-y'|/4) no cilindro
ANNULUS_HEIGHT_SCALE = 0.25

LATITUDE_SEPARATION_CONSTANT = 0.25

LONGITUDE_HOLDER_CONSTANT = {
    SurfaceKind.ANNULUS: math.sqrt(2.0) / 4.0,
    SurfaceKind.SPHERE: 2.0,
    SurfaceKind.DISK: math.sqrt(0.5),
}

SURFACE_DIAMETER = {
    SurfaceKind.ANNULUS: 0.5,
    SurfaceKind.SPHERE: 2.0,
    SurfaceKind.DISK: 2.0,
}


def tolerance_scale(kind: SurfaceKind) -> float:
    """Fator que leva tolerâncias normalizadas (diâmetro 1/2) para a métrica da superfície."""
    return 2.0 * SURFACE_DIAMETER[SurfaceKind(kind)]


def torus_distance(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    delta = np.abs(np.mod(np.asarray(a) - np.asarray(b), 1.0))
    return np.minimum(delta, 1.0 - delta)


def pointwise_distances(kind: SurfaceKind, left: np.ndarray, right: np.ndarray) -> np.ndarray:
    left = np.atleast_2d(left)
    right = np.atleast_2d(right)
    if kind is SurfaceKind.ANNULUS:
        return np.maximum(
            torus_distance(left[:, 0], right[:, 0]),
            ANNULUS_HEIGHT_SCALE * np.abs(left[:, 1] - right[:, 1]),
        )
    return np.sqrt(np.sum((left - right) ** 2, axis=1))


def pairwise_distances(kind: SurfaceKind, left: np.ndarray, right: np.ndarray) -> np.ndarray:
    left = np.atleast_2d(left)
    right = np.atleast_2d(right)
    if kind is SurfaceKind.ANNULUS:
        return np.maximum(
            torus_distance(left[:, 0][:, None], right[:, 0][None, :]),
            ANNULUS_HEIGHT_SCALE * np.abs(left[:, 1][:, None] - right[:, 1][None, :]),
        )
    return cdist(left, right, metric="euclidean")


def dist(a: SurfacePoint, b: SurfacePoint) -> float:
    if a.kind is not b.kind:
        raise KindMismatch(a.kind, b.kind)
    return float(pointwise_distances(a.kind, a.coords, b.coords)[0])

from typing import Tuple

import numpy as np

from abc_lab_shared.domain.entities import AnnulusPoint, SurfacePoint, wrap_unit
from abc_lab_shared.domain.enums import SurfaceKind
from abc_lab_shared.domain.exceptions import DomainError

SINGULAR_TOLERANCE = 1e-12
TWO_PI = 2.0 * np.pi


def to_surface(theta: np.ndarray, y: np.ndarray, kind: SurfaceKind) -> np.ndarray:
    """Aplica π a coordenadas (θ, y) do cilindro, devolvendo coordenadas ambientes (n, d)."""
    theta = np.asarray(theta, dtype=float)
    y = np.clip(np.asarray(y, dtype=float), -1.0, 1.0)

    if kind is SurfaceKind.ANNULUS:
        return np.stack([wrap_unit(theta), y], axis=-1)

    angle = TWO_PI * theta
    if kind is SurfaceKind.SPHERE:
        rho = np.sqrt(1.0 - y * y)
        return np.stack([rho * np.cos(angle), rho * np.sin(angle), y], axis=-1)

    radius = np.sqrt((1.0 + y) / 2.0)
    return np.stack([radius * np.cos(angle), radius * np.sin(angle)], axis=-1)


def singular_mask(coords: np.ndarray, kind: SurfaceKind) -> np.ndarray:
    """Polos da esfera e centro do disco, onde θ não está definido."""
    coords = np.atleast_2d(coords)
    if kind is SurfaceKind.ANNULUS:
        return np.zeros(coords.shape[0], dtype=bool)
    return np.hypot(coords[:, 0], coords[:, 1]) < SINGULAR_TOLERANCE


def to_chart(coords: np.ndarray, kind: SurfaceKind) -> Tuple[np.ndarray, np.ndarray]:
    """π⁻¹ vetorizada; nos pontos singulares devolve θ = 0."""
    coords = np.atleast_2d(np.asarray(coords, dtype=float))

    if kind is SurfaceKind.ANNULUS:
        return wrap_unit(coords[:, 0]), np.clip(coords[:, 1], -1.0, 1.0)

    theta = np.where(
        singular_mask(coords, kind),
        0.0,
        wrap_unit(np.arctan2(coords[:, 1], coords[:, 0]) / TWO_PI),
    )
    if kind is SurfaceKind.SPHERE:
        y = coords[:, 2]
    else:
        y = 2.0 * (coords[:, 0] ** 2 + coords[:, 1] ** 2) - 1.0
    return theta, np.clip(y, -1.0, 1.0)


def project_pi(p: AnnulusPoint, kind: SurfaceKind) -> SurfacePoint:
    kind = SurfaceKind(kind)
    coords = to_surface(np.array([p.theta]), np.array([p.y]), kind)[0]
    return SurfacePoint(kind, coords)


def project_pi_inverse(sp: SurfacePoint) -> AnnulusPoint:
    if singular_mask(sp.coords, sp.kind)[0]:
        raise DomainError(f"π não é invertível no ponto {sp.coords.tolist()} de {sp.kind.value}")
    theta, y = to_chart(sp.coords, sp.kind)
    return AnnulusPoint(float(theta[0]), float(y[0]))

import logging
import math
from fractions import Fraction
from typing import Optional, Tuple

import numpy as np
from abc_lab_shared.domain.entities import (
    BoxExchange,
    BoxExchangeSpec,
    Compose,
    Conjugate,
    Identity,
    Inverse,
    MapExpr,
    Rotation,
    SurfacePoint,
    reduce_rotation,
    wrap_unit,
)
from abc_lab_shared.domain.enums import SurfaceKind
from abc_lab_shared.domain.exceptions import KindMismatch
from abc_lab_shared.geometry import (
    chart_sample,
    pointwise_distances,
    stream_rng,
    to_chart,
    to_surface,
    torus_distance,
)

from src.app.config import settings

logger = logging.getLogger(__name__)

ChartArrays = Tuple[np.ndarray, np.ndarray]

# Diferenças laterais que discordam acima disto indicam o esqueleto das caixas
JUMP_TOLERANCE = 1e-6
DISPLACEMENT_TOLERANCE = 1e-9


def signed_theta_difference(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """a - b reduzido a [-1/2, 1/2)."""
    return np.mod(np.asarray(a) - np.asarray(b) + 0.5, 1.0) - 0.5


def box_exchange_chart(
    spec: BoxExchangeSpec, theta: np.ndarray, y: np.ndarray, inverse: bool = False
) -> ChartArrays:
    """Translada cada caixa da faixa para a caixa indicada pela permutação; fora da faixa é a identidade."""
    perm = spec.inverse_perm if inverse else spec.perm
    inside = (y >= spec.band_low) & (y < spec.band_high)

    scaled_theta = theta * spec.n_theta
    col = np.clip(np.floor(scaled_theta).astype(np.int64), 0, spec.n_theta - 1)
    scaled_y = (y - spec.band_low) / spec.row_height
    row = np.clip(np.floor(scaled_y).astype(np.int64), 0, spec.n_y - 1)

    box = row * spec.n_theta + col
    target_row, target_col = np.divmod(perm[box], spec.n_theta)

    new_theta = wrap_unit((target_col + (scaled_theta - col)) / spec.n_theta)
    new_y = spec.band_low + (target_row + (scaled_y - row)) * spec.row_height

    return np.where(inside, new_theta, theta), np.where(inside, new_y, y)


def rotation_c0_value(kind: SurfaceKind, alpha: float, beta: float, region_eta: float) -> float:
    """C⁰ exato entre duas rotações: deslocamento no círculo mais largo de 𝕄_η."""
    t = float(torus_distance(alpha, beta))
    if kind is SurfaceKind.ANNULUS:
        return t
    if kind is SurfaceKind.SPHERE:
        return 2.0 * math.sin(math.pi * t)
    return 2.0 * math.sqrt(1.0 - region_eta / 2.0) * math.sin(math.pi * t)


def rotation_angle(expr: MapExpr) -> Optional[float]:
    if isinstance(expr, Identity):
        return 0.0
    if isinstance(expr, Rotation):
        return expr.alpha_float
    return None


class MapService:
    def __init__(self, fd_step: Optional[float] = None):
        self.fd_step = fd_step or settings.FD_STEP

    def chart_map(
        self,
        expr: MapExpr,
        theta: np.ndarray,
        y: np.ndarray,
        inverse: bool = False,
    ) -> ChartArrays:
        """Avalia a árvore em coordenadas (θ, y) do cilindro."""
        if isinstance(expr, Identity):
            return theta, y

        if isinstance(expr, Rotation):
            alpha = expr.alpha_float
            return wrap_unit(theta - alpha if inverse else theta + alpha), y

        if isinstance(expr, BoxExchange):
            return box_exchange_chart(expr.spec, theta, y, inverse=inverse)

        if isinstance(expr, Compose):
            first, second = (expr.outer, expr.inner) if inverse else (expr.inner, expr.outer)
            theta, y = self.chart_map(first, theta, y, inverse)
            return self.chart_map(second, theta, y, inverse)

        if isinstance(expr, Inverse):
            return self.chart_map(expr.base, theta, y, not inverse)

        if isinstance(expr, Conjugate):
            theta, y = self.chart_map(expr.conjugacy, theta, y, True)
            theta, y = self.chart_map(expr.base, theta, y, inverse)
            return self.chart_map(expr.conjugacy, theta, y, False)

        raise TypeError(f"Nó de mapa não suportado: {type(expr).__name__}")

    def evaluate_coords(self, expr: MapExpr, coords: np.ndarray, inverse: bool = False) -> np.ndarray:
        coords = np.atleast_2d(np.asarray(coords, dtype=float))
        theta, y = to_chart(coords, expr.kind)
        new_theta, new_y = self.chart_map(expr, theta, y, inverse=inverse)

        result = to_surface(new_theta, new_y, expr.kind)
        unchanged = (new_theta == theta) & (new_y == y)
        result[unchanged] = coords[unchanged]
        return result

    def evaluate(self, f: MapExpr, p: SurfacePoint) -> SurfacePoint:
        if p.kind is not f.kind:
            raise KindMismatch(f.kind, p.kind)
        return SurfacePoint(f.kind, self.evaluate_coords(f, p.coords)[0])

    def inverse_evaluate(self, f: MapExpr, p: SurfacePoint) -> SurfacePoint:
        if p.kind is not f.kind:
            raise KindMismatch(f.kind, p.kind)
        return SurfacePoint(f.kind, self.evaluate_coords(f, p.coords, inverse=True)[0])

    def orbit_coords(self, f: MapExpr, coords: np.ndarray, n: int) -> np.ndarray:
        """Átomos f(x), ..., fⁿ(x) para cada ponto; shape (pontos, n, d)."""
        if n < 1:
            raise ValueError("n deve ser ao menos 1")
        coords = np.atleast_2d(np.asarray(coords, dtype=float))

        if isinstance(f, Conjugate) and rotation_angle(f.base) is not None:
            return self.conjugated_orbit(f.conjugacy, f.base, coords, n)

        orbit = np.empty((coords.shape[0], n, coords.shape[1]))
        current = coords
        for k in range(n):
            current = self.evaluate_coords(f, current)
            orbit[:, k, :] = current
        return orbit

    def conjugated_orbit(self, h: MapExpr, base: MapExpr, coords: np.ndarray, n: int, start: int = 1) -> np.ndarray:
        """Lei das iteradas de h∘R_α∘h⁻¹: o k-ésimo átomo é h(θ + kα, y)."""
        theta, y = to_chart(coords, h.kind)
        theta, y = self.chart_map(h, theta, y, inverse=True)

        steps = np.arange(start, start + n, dtype=np.int64)
        alpha = reduce_rotation(base.alpha) if isinstance(base, Rotation) else Fraction(0)
        if isinstance(alpha, Fraction):
            shifts = ((steps * alpha.numerator) % alpha.denominator) / alpha.denominator
        else:
            shifts = np.mod(steps * alpha, 1.0)

        orbit_theta = wrap_unit(theta[:, None] + shifts[None, :]).ravel()
        orbit_y = np.repeat(y, n)
        orbit_theta, orbit_y = self.chart_map(h, orbit_theta, orbit_y)
        return to_surface(orbit_theta, orbit_y, h.kind).reshape(coords.shape[0], n, -1)

    def chart_jacobian(
        self, expr: MapExpr, theta: np.ndarray, y: np.ndarray, step: float
    ) -> Tuple[np.ndarray, np.ndarray]:
        """Jacobianas por diferenças centrais em (θ, y) e máscara dos pontos regulares."""
        base_theta, base_y = self.chart_map(expr, theta, y)
        columns, regular = [], np.ones(theta.shape[0], dtype=bool)

        for d_theta, d_y in ((step, 0.0), (0.0, step)):
            plus_theta, plus_y = self.chart_map(expr, wrap_unit(theta + d_theta), y + d_y)
            minus_theta, minus_y = self.chart_map(expr, wrap_unit(theta - d_theta), y - d_y)

            forward = np.stack([signed_theta_difference(plus_theta, base_theta), plus_y - base_y], axis=1) / step
            backward = np.stack([signed_theta_difference(base_theta, minus_theta), base_y - minus_y], axis=1) / step

            regular &= np.all(np.abs(forward - backward) <= JUMP_TOLERANCE, axis=1)
            columns.append((forward + backward) / 2.0)

        return np.stack(columns, axis=2), regular

    def _region_sample(self, seed: int, tag: str, samples: int, region_eta: float) -> ChartArrays:
        return chart_sample(stream_rng(seed, tag), samples, eta=region_eta)

    def c0_distance(self, f: MapExpr, g: MapExpr, region_eta: float, samples: int, seed: int) -> float:
        if f.kind is not g.kind:
            raise KindMismatch(f.kind, g.kind)

        alpha, beta = rotation_angle(f), rotation_angle(g)
        if alpha is not None and beta is not None:
            return rotation_c0_value(f.kind, alpha, beta, region_eta)

        theta, y = self._region_sample(seed, "c0", samples, region_eta)
        return float(np.max(self._pointwise_gap(f, g, theta, y), initial=0.0))

    def _pointwise_gap(self, f: MapExpr, g: MapExpr, theta: np.ndarray, y: np.ndarray) -> np.ndarray:
        image_f = to_surface(*self.chart_map(f, theta, y), f.kind)
        image_g = to_surface(*self.chart_map(g, theta, y), g.kind)
        return pointwise_distances(f.kind, image_f, image_g)

    def c1_distance(
        self, f: MapExpr, g: MapExpr, region_eta: float, samples: int, h_fd: Optional[float], seed: int
    ) -> float:
        if f.kind is not g.kind:
            raise KindMismatch(f.kind, g.kind)

        alpha, beta = rotation_angle(f), rotation_angle(g)
        if alpha is not None and beta is not None:
            return rotation_c0_value(f.kind, alpha, beta, region_eta)

        step = h_fd or self.fd_step
        margin = max(region_eta, 2.0 * step)
        rng = stream_rng(seed, "c1")

        kept_theta, kept_y, rejected = [], [], 0
        for _ in range(8):
            theta, y = chart_sample(rng, samples, eta=margin)
            _, regular_f = self.chart_jacobian(f, theta, y, step)
            _, regular_g = self.chart_jacobian(g, theta, y, step)
            regular = regular_f & regular_g
            rejected += int(np.count_nonzero(~regular))
            kept_theta.append(theta[regular])
            kept_y.append(y[regular])
            if sum(len(t) for t in kept_theta) >= samples:
                break

        theta = np.concatenate(kept_theta)[:samples]
        y = np.concatenate(kept_y)[:samples]
        if rejected:
            logger.debug(f"c1: {rejected} amostras rejeitadas no esqueleto das caixas")
        if theta.size == 0:
            return 0.0

        jac_f, _ = self.chart_jacobian(f, theta, y, step)
        jac_g, _ = self.chart_jacobian(g, theta, y, step)
        jacobian_gap = np.linalg.norm(jac_f - jac_g, ord=2, axis=(1, 2))
        return float(np.max(self._pointwise_gap(f, g, theta, y)) + np.max(jacobian_gap))

    def pair_ratios(self, f: MapExpr, left: np.ndarray, right: np.ndarray, inverse: bool = False) -> np.ndarray:
        """Razões d(f(x), f(x')) / d(x, x') para pares alinhados."""
        left = np.atleast_2d(left)
        right = np.atleast_2d(right)
        base = pointwise_distances(f.kind, left, right)
        image = pointwise_distances(
            f.kind, self.evaluate_coords(f, left, inverse=inverse), self.evaluate_coords(f, right, inverse=inverse)
        )
        valid = base > 0.0
        return image[valid] / base[valid]

    def _preserved_displacement(self, f: MapExpr, left: ChartArrays, right: ChartArrays, inverse: bool) -> np.ndarray:
        moved_left = self.chart_map(f, *left, inverse=inverse)
        moved_right = self.chart_map(f, *right, inverse=inverse)
        shift_theta = signed_theta_difference(moved_left[0], left[0]) - signed_theta_difference(
            moved_right[0], right[0]
        )
        shift_y = (moved_left[1] - left[1]) - (moved_right[1] - right[1])
        return (np.abs(signed_theta_difference(shift_theta, 0.0)) <= DISPLACEMENT_TOLERANCE) & (
            np.abs(shift_y) <= DISPLACEMENT_TOLERANCE
        )

    def sample_pairs(
        self, seed: int, samples: int, same_piece_only: bool, local_scale: float = 1e-4
    ) -> Tuple[ChartArrays, ChartArrays]:
        rng = stream_rng(seed, "bilipschitz")
        theta, y = chart_sample(rng, samples)
        if same_piece_only:
            partner_theta = wrap_unit(theta + rng.uniform(-local_scale, local_scale, samples))
            partner_y = np.clip(y + rng.uniform(-local_scale, local_scale, samples), -1.0, 1.0)
            return (theta, y), (partner_theta, partner_y)

        i, j = np.triu_indices(samples, k=1)
        return (theta[i], y[i]), (theta[j], y[j])

    def bilipschitz_estimate(self, f: MapExpr, samples: int, seed: int, same_piece_only: bool = False) -> float:
        """Estimativa inferior de Q: máximo das razões de f e de f⁻¹ nos pares amostrados."""
        if rotation_angle(f) is not None:
            return 1.0

        left, right = self.sample_pairs(seed, samples, same_piece_only)
        estimate = 1.0
        for inverse in (False, True):
            a, b = left, right
            if same_piece_only:
                keep = self._preserved_displacement(f, left, right, inverse)
                a = (left[0][keep], left[1][keep])
                b = (right[0][keep], right[1][keep])
                if a[0].size == 0:
                    continue
            ratios = self.pair_ratios(
                f, to_surface(a[0], a[1], f.kind), to_surface(b[0], b[1], f.kind), inverse=inverse
            )
            if ratios.size:
                estimate = max(estimate, float(ratios.max()))
        return estimate

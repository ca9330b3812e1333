import logging
import math
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from abc_lab_shared.domain.entities import DiscreteMeasure, Rotation
from abc_lab_shared.domain.enums import SurfaceKind
from abc_lab_shared.domain.models import PropertyCheckResult
from abc_lab_shared.geometry import (
    LATITUDE_SEPARATION_CONSTANT,
    LONGITUDE_HOLDER_CONSTANT,
    chart_sample,
    pairwise_distances,
    pointwise_distances,
    singular_mask,
    stream_rng,
    to_chart,
    to_surface,
)
from scipy.optimize import linprog
from scipy.stats import wasserstein_distance

from src.processor.services.kicker_service import KickerService
from src.processor.services.map_service import rotation_c0_value
from src.processor.services.transport_service import TransportService

logger = logging.getLogger(__name__)

SURFACES = (SurfaceKind.ANNULUS, SurfaceKind.SPHERE, SurfaceKind.DISK)


def linprog_kantorovich(kind: SurfaceKind, mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
    """Problema de transporte denso resolvido pelo HiGHS, independente do simplex de rede."""
    cost = pairwise_distances(kind, mu.points, nu.points)
    n, m = cost.shape
    rows = np.kron(np.eye(n), np.ones(m))
    cols = np.kron(np.ones(n), np.eye(m))
    result = linprog(
        cost.ravel(),
        A_eq=np.vstack([rows, cols]),
        b_eq=np.concatenate([mu.weights, nu.weights]),
        bounds=(0, None),
        method="highs",
    )
    if not result.success:
        raise RuntimeError(f"linprog falhou: {result.message}")
    return float(result.fun)


def uniform_surface_sample(kind: SurfaceKind, rng: np.random.Generator, n: int) -> np.ndarray:
    """Amostra uniforme nativa de cada superfície, sem passar por π."""
    if kind is SurfaceKind.SPHERE:
        points = rng.standard_normal((n, 3))
        return points / np.linalg.norm(points, axis=1, keepdims=True)
    if kind is SurfaceKind.DISK:
        points = rng.uniform(-1.0, 1.0, (2 * n + 64, 2))
        return points[np.sum(points**2, axis=1) <= 1.0][:n]
    return np.stack([rng.random(n), rng.uniform(-1.0, 1.0, n)], axis=1)


class PropertySuiteService:
    def __init__(
        self,
        transport_service: TransportService,
        kicker_service: KickerService,
        seed: int = 0,
        trials: int = 100,
        monte_carlo_samples: int = 1_000_000,
        sigma_bound: float = 3.0,
    ):
        self.transport_service = transport_service
        self.kicker_service = kicker_service
        self.map_service = transport_service.map_service
        self.seed = seed
        self.trials = trials
        self.monte_carlo_samples = monte_carlo_samples
        self.sigma_bound = sigma_bound

    def checks(self) -> Dict[str, Callable[[], PropertyCheckResult]]:
        return {
            "lp_oracle": self.check_lp_oracle,
            "one_d_oracle": self.check_one_d_oracle,
            "dk_c0": self.check_dk_c0,
            "kanto_isometry": self.check_kanto_isometry,
            "kanto_box_exchange": self.check_kanto_box_exchange,
            "metric_axioms": self.check_metric_axioms,
            "pi_measure_preservation": self.check_pi_measure_preservation,
            "pi_round_trip": self.check_pi_round_trip,
            "latitude_separation": self.check_latitude_separation,
            "longitude_holder": self.check_longitude_holder,
            "area_preservation": self.check_area_preservation,
        }

    def run_check(self, name: str) -> PropertyCheckResult:
        result = self.checks()[name]()
        level = logging.INFO if result.passed else logging.WARNING
        logger.log(level, f"Propriedade {name}: medido {result.measured:.3e}, limite {result.bound:.3e}")
        return result

    def _random_measure(self, rng: np.random.Generator, kind: SurfaceKind, size: int) -> DiscreteMeasure:
        theta, y = chart_sample(rng, size)
        weights = rng.random(size) + 0.05
        return DiscreteMeasure(kind, to_surface(theta, y, kind), weights / weights.sum())

    def check_lp_oracle(self) -> PropertyCheckResult:
        rng = stream_rng(self.seed, "lp_oracle")
        worst = 0.0
        for kind in SURFACES:
            for _ in range(self.trials):
                mu = self._random_measure(rng, kind, int(rng.integers(1, 13)))
                nu = self._random_measure(rng, kind, int(rng.integers(1, 13)))
                value, _ = self.transport_service.kantorovich(mu, nu)
                oracle = linprog_kantorovich(kind, mu, nu)
                worst = max(worst, abs(value - oracle) / max(1.0, abs(oracle)))
        return PropertyCheckResult(
            name="lp_oracle", passed=worst <= 1e-9, measured=worst, bound=1e-9, details={"pairs": 3 * self.trials}
        )

    def check_one_d_oracle(self) -> PropertyCheckResult:
        rng = stream_rng(self.seed, "one_d_oracle")
        worst = 0.0
        for _ in range(self.trials // 2):
            theta0 = rng.random()
            y_mu, y_nu = rng.uniform(-1, 1, int(rng.integers(1, 10))), rng.uniform(-1, 1, int(rng.integers(1, 10)))
            w_mu, w_nu = rng.random(y_mu.size) + 0.05, rng.random(y_nu.size) + 0.05
            w_mu, w_nu = w_mu / w_mu.sum(), w_nu / w_nu.sum()

            kind = SurfaceKind.ANNULUS
            mu = DiscreteMeasure(kind, to_surface(np.full(y_mu.size, theta0), y_mu, kind), w_mu)
            nu = DiscreteMeasure(kind, to_surface(np.full(y_nu.size, theta0), y_nu, kind), w_nu)
            oracle = wasserstein_distance(y_mu, y_nu, w_mu, w_nu) / 4.0
            worst = max(worst, abs(self.transport_service.kantorovich_value(mu, nu) - oracle))
        return PropertyCheckResult(name="one_d_oracle", passed=worst <= 1e-6, measured=worst, bound=1e-6)

    def check_dk_c0(self) -> PropertyCheckResult:
        """d_K(R_α μ, R_β μ) ≤ d_C⁰(R_α, R_β) com o valor analítico."""
        rng = stream_rng(self.seed, "dk_c0")
        worst = -math.inf
        for kind in SURFACES:
            for _ in range(self.trials):
                mu = self._random_measure(rng, kind, 8)
                alpha, beta = rng.random(), rng.random()
                left = self.transport_service.pushforward(Rotation(kind, alpha), mu)
                right = self.transport_service.pushforward(Rotation(kind, beta), mu)
                gap = self.transport_service.kantorovich_value(left, right) - rotation_c0_value(kind, alpha, beta, 0.0)
                worst = max(worst, gap)
        return PropertyCheckResult(name="dk_c0", passed=worst <= 1e-9, measured=worst, bound=1e-9)

    def check_kanto_isometry(self) -> PropertyCheckResult:
        rng = stream_rng(self.seed, "kanto_isometry")
        worst = 0.0
        for kind in SURFACES:
            for _ in range(self.trials):
                mu, nu = self._random_measure(rng, kind, 6), self._random_measure(rng, kind, 6)
                phi = Rotation(kind, rng.random())
                base = self.transport_service.kantorovich_value(mu, nu)
                pushed = self.transport_service.kantorovich_value(
                    self.transport_service.pushforward(phi, mu), self.transport_service.pushforward(phi, nu)
                )
                worst = max(worst, abs(pushed - base))
        return PropertyCheckResult(name="kanto_isometry", passed=worst <= 1e-9, measured=worst, bound=1e-9)

    def check_kanto_box_exchange(self) -> PropertyCheckResult:
        """(1/Q)·d_K(μ,ν) ≤ d_K(φ_*μ, φ_*ν) ≤ Q·d_K(μ,ν) com Q certificado nos suportes."""
        rng = stream_rng(self.seed, "kanto_box")
        worst = -math.inf
        max_q = 1.0
        for kind in SURFACES:
            phi = self.kicker_service.ergodic_box_exchange(1, 0.5, kind, rows=4)
            for _ in range(self.trials):
                mu, nu = self._random_measure(rng, kind, 6), self._random_measure(rng, kind, 6)
                support = np.vstack([mu.points, nu.points])
                i, j = np.triu_indices(support.shape[0], k=1)
                q_forward = self.map_service.pair_ratios(phi, support[i], support[j])
                images = self.map_service.evaluate_coords(phi, support)
                q_inverse = self.map_service.pair_ratios(phi, images[i], images[j], inverse=True)
                q = max(1.0, float(np.max(q_forward, initial=1.0)), float(np.max(q_inverse, initial=1.0)))
                max_q = max(max_q, q)

                base = self.transport_service.kantorovich_value(mu, nu)
                pushed = self.transport_service.kantorovich_value(
                    self.transport_service.pushforward(phi, mu), self.transport_service.pushforward(phi, nu)
                )
                worst = max(worst, pushed - q * base, base / q - pushed)
        return PropertyCheckResult(
            name="kanto_box_exchange", passed=worst <= 1e-9, measured=worst, bound=1e-9, details={"max_q": max_q}
        )

    def check_metric_axioms(self) -> PropertyCheckResult:
        rng = stream_rng(self.seed, "metric_axioms")
        worst = 0.0
        for kind in SURFACES:
            for _ in range(2 * self.trials // 3):
                a, b, c = (self._random_measure(rng, kind, 4) for _ in range(3))
                ab = self.transport_service.kantorovich_value(a, b)
                ba = self.transport_service.kantorovich_value(b, a)
                ac = self.transport_service.kantorovich_value(a, c)
                cb = self.transport_service.kantorovich_value(c, b)
                worst = max(worst, abs(ab - ba), ab - (ac + cb))
        return PropertyCheckResult(name="metric_axioms", passed=worst <= 1e-9, measured=worst, bound=1e-9)

    def _random_boxes(self, rng: np.random.Generator, count: int) -> List[Tuple[float, float, float, float]]:
        boxes = []
        for _ in range(count):
            theta0, y0 = rng.random() * 0.8, rng.uniform(-0.95, 0.6)
            boxes.append((theta0, theta0 + rng.uniform(0.05, 0.2), y0, y0 + rng.uniform(0.05, 0.35)))
        return boxes

    @staticmethod
    def _box_fraction(theta: np.ndarray, y: np.ndarray, box: Tuple[float, float, float, float]) -> float:
        t0, t1, y0, y1 = box
        return float(np.mean((theta >= t0) & (theta < t1) & (y >= y0) & (y < y1)))

    def check_pi_measure_preservation(self) -> PropertyCheckResult:
        """Massa de π(B) sob amostras uniformes nativas contra Leb_𝔸(B), em unidades de σ."""
        rng = stream_rng(self.seed, "pi_measure")
        n = self.monte_carlo_samples
        worst = 0.0
        for kind in SURFACES:
            points = uniform_surface_sample(kind, rng, n)
            theta, y = to_chart(points, kind)
            for box in self._random_boxes(rng, 20):
                expected = (box[1] - box[0]) * (box[3] - box[2]) / 2.0
                sigma = math.sqrt(expected * (1.0 - expected) / points.shape[0])
                worst = max(worst, abs(self._box_fraction(theta, y, box) - expected) / sigma)
        return PropertyCheckResult(
            name="pi_measure_preservation", passed=worst <= self.sigma_bound, measured=worst, bound=self.sigma_bound
        )

    def check_pi_round_trip(self) -> PropertyCheckResult:
        rng = stream_rng(self.seed, "pi_round_trip")
        worst = 0.0
        for kind in SURFACES:
            theta, y = chart_sample(rng, 10_000, eta=1e-6)
            points = to_surface(theta, y, kind)
            back = to_surface(*to_chart(points, kind), kind)
            keep = ~singular_mask(points, kind)
            worst = max(worst, float(np.max(pointwise_distances(kind, points[keep], back[keep]))))
        return PropertyCheckResult(name="pi_round_trip", passed=worst <= 1e-10, measured=worst, bound=1e-10)

    def check_latitude_separation(self) -> PropertyCheckResult:
        """min_{θ,θ'} dist(π(θ,y), π(θ',y')) ≥ |y-y'|/4 nas grades."""
        theta = np.linspace(0.0, 1.0, 64, endpoint=False)
        y_values = np.linspace(-1.0, 1.0, 17)
        worst = -math.inf
        for kind in SURFACES:
            for a in range(y_values.size):
                left = to_surface(theta, np.full(theta.size, y_values[a]), kind)
                for b in range(a + 1, y_values.size):
                    right = to_surface(theta, np.full(theta.size, y_values[b]), kind)
                    gap = LATITUDE_SEPARATION_CONSTANT * abs(y_values[a] - y_values[b])
                    worst = max(worst, gap - float(pairwise_distances(kind, left, right).min()))
        return PropertyCheckResult(name="latitude_separation", passed=worst <= 1e-12, measured=worst, bound=1e-12)

    def check_longitude_holder(self) -> PropertyCheckResult:
        rng = stream_rng(self.seed, "longitude_holder")
        worst = 0.0
        for kind in SURFACES:
            theta = rng.random(1000)
            y, y_prime = rng.uniform(-1, 1, 1000), rng.uniform(-1, 1, 1000)
            distances = pointwise_distances(kind, to_surface(theta, y, kind), to_surface(theta, y_prime, kind))
            scale = np.sqrt(np.abs(y - y_prime))
            valid = scale > 0
            worst = max(worst, float(np.max(distances[valid] / scale[valid])) / LONGITUDE_HOLDER_CONSTANT[kind])
        return PropertyCheckResult(name="longitude_holder", passed=worst <= 1.0 + 1e-12, measured=worst, bound=1.0)

    def check_area_preservation(self, kind: Optional[SurfaceKind] = None) -> PropertyCheckResult:
        """Massa da pré-imagem de caixas aleatórias sob um kicker igual à área da caixa, em unidades de σ."""
        rng = stream_rng(self.seed, "area_preservation")
        n = self.monte_carlo_samples
        worst = 0.0
        for surface in (kind,) if kind else SURFACES:
            kicker = self.kicker_service.ergodic_box_exchange(3, 0.2, surface, rows=4)
            theta, y = chart_sample(rng, n)
            moved_theta, moved_y = self.map_service.chart_map(kicker, theta, y)
            for box in self._random_boxes(rng, 20):
                expected = (box[1] - box[0]) * (box[3] - box[2]) / 2.0
                sigma = math.sqrt(expected * (1.0 - expected) / n)
                worst = max(worst, abs(self._box_fraction(moved_theta, moved_y, box) - expected) / sigma)
        return PropertyCheckResult(
            name="area_preservation", passed=worst <= self.sigma_bound, measured=worst, bound=self.sigma_bound
        )

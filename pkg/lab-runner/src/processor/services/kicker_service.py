import logging
import math
from typing import Optional, Tuple

import numpy as np
from abc_lab_shared.domain.entities import BoxExchange, BoxExchangeSpec
from abc_lab_shared.domain.enums import SurfaceKind
from abc_lab_shared.domain.exceptions import ResolutionExceeded
from abc_lab_shared.domain.models import KickerCertificate, SeparationCertificate
from abc_lab_shared.geometry import cell_radius, chart_grid, mu_y_measure, tolerance_scale

from src.app.config import settings
from src.processor.services.separation_service import SeparationService
from src.processor.services.transport_service import TransportService

logger = logging.getLogger(__name__)

# Colunas da grade de certificação por período de simetria
CERTIFICATE_COLUMNS_PER_PERIOD = 4
CERTIFICATE_ROWS = 64


def next_power_of_two(value: int) -> int:
    return 1 << max(0, math.ceil(math.log2(max(1, value))))


def ergodic_layout(q: int, rows: int) -> Tuple[int, int]:
    """(k, n_theta): k é a menor potência de dois, ao menos 2, com q·k ≥ rows; cada domínio tem rows·k colunas."""
    k = 2
    while q * k < rows:
        k *= 2
    return k, q * rows * k


def ergodic_box_count(q: int, rows: int) -> int:
    _, n_theta = ergodic_layout(q, rows)
    return n_theta * rows


def ergodic_permutation(q: int, rows: int, k: int) -> np.ndarray:
    """
    Em cada domínio de R_{1/q}, a caixa (r, u + R·v) vai para a coluna v·R + r, na linha u se v é par
    e na linha R-1-u se v é ímpar. Colunas vizinhas caem a uma linha ou a um bloco de distância,
    também entre domínios, o que exige k par.
    """
    if k % 2:
        raise ValueError(f"k deve ser par: {k}")
    columns = rows * k
    n_theta = q * columns
    r, d, v, u = np.meshgrid(np.arange(rows), np.arange(q), np.arange(k), np.arange(rows), indexing="ij")
    target_row = np.where(v % 2 == 0, u, rows - 1 - u)
    source = r * n_theta + d * columns + u + rows * v
    target = target_row * n_theta + d * columns + v * rows + r

    perm = np.empty(rows * n_theta, dtype=np.int64)
    perm[source.ravel()] = target.ravel()
    return perm


def pearl_permutation(n_blocks: int, block_rows: int, colors: int, rank: int) -> np.ndarray:
    """
    Cada bloco tem K = colors·rank linhas e colunas. A linha r = s·colors + c (cor c, posição s)
    envia a coluna a para a linha s·colors + a // rank e a coluna c·rank + a % rank, de modo que
    cada cor ocupa sua própria faixa vertical do bloco.
    """
    size = colors * rank
    n_theta = n_blocks * size
    b, j, s, c, a = np.meshgrid(
        np.arange(block_rows),
        np.arange(n_blocks),
        np.arange(rank),
        np.arange(colors),
        np.arange(size),
        indexing="ij",
    )
    source = (b * size + s * colors + c) * n_theta + j * size + a
    target = (b * size + s * colors + a // rank) * n_theta + j * size + c * rank + a % rank

    perm = np.empty(n_theta * block_rows * size, dtype=np.int64)
    perm[source.ravel()] = target.ravel()
    return perm


class KickerService:
    def __init__(
        self,
        transport_service: TransportService,
        separation_service: SeparationService,
        box_cap: Optional[int] = None,
        y_grid: Optional[int] = None,
        max_doublings: Optional[int] = None,
    ):
        self.transport_service = transport_service
        self.separation_service = separation_service
        self.box_cap = box_cap or settings.KICKER_BOX_CAP
        self.y_grid = y_grid or settings.Y_GRID
        self.max_doublings = max_doublings or settings.MAX_KICKER_DOUBLINGS

    def _check_cap(self, boxes: int, what: str, **details: int) -> None:
        if boxes > self.box_cap:
            raise ResolutionExceeded(
                f"{what}: {boxes} caixas excedem o limite {self.box_cap}",
                details={"boxes": boxes, "cap": self.box_cap, **details},
            )

    def ergodic_box_exchange(self, q: int, eps: float, kind: SurfaceKind, rows: int) -> BoxExchange:
        k, n_theta = ergodic_layout(q, rows)
        self._check_cap(n_theta * rows, f"Kicker ergódico q={q}, R={rows}", rows=rows, q=q)
        spec = BoxExchangeSpec(
            n_theta=n_theta,
            n_y=rows,
            perm=ergodic_permutation(q, rows, k),
            q_equivariance=q,
            y_margin=eps / 4.0,
        )
        return BoxExchange(SurfaceKind(kind), spec)

    def certify_ergodic(self, h: BoxExchange, q: int, eps: float) -> KickerCertificate:
        """max_y d_K(h_*Leb_{𝕋×{y}}, Leb) sobre a grade de y em 𝕀_ε, resolvido por simetria R_{1/(q·k)}."""
        spec = h.spec
        kind = h.kind
        k = spec.n_theta // (q * spec.n_y)
        order = q * k

        grid_columns = order * CERTIFICATE_COLUMNS_PER_PERIOD
        leb = chart_grid(kind, grid_columns, CERTIFICATE_ROWS)
        radius = cell_radius(kind, grid_columns, CERTIFICATE_ROWS)

        y_values = SeparationService.region_y_values(eps, self.y_grid)
        pushed = [self.transport_service.pushforward(h, mu_y_measure(y, kind, spec.n_theta)) for y in y_values]
        distances = self.transport_service.distances_to(pushed, leb, order=order)

        max_distance = float(distances.max())
        tolerance = eps * tolerance_scale(kind)
        return KickerCertificate(
            q=q,
            eps=eps,
            surface=kind,
            n_theta=spec.n_theta,
            n_y=spec.n_y,
            columns_per_row=k,
            boxes=spec.box_count,
            y_grid=self.y_grid,
            max_distance=max_distance,
            radius=radius,
            tolerance=tolerance,
            passed=max_distance <= tolerance,
        )

    def build_ergodic_kicker(
        self, q: int, eps: float, kind: SurfaceKind, resolution_factor: int = 1
    ) -> Tuple[BoxExchange, KickerCertificate]:
        """Menor R (potência de dois) cujo certificado passa, multiplicado por resolution_factor."""
        if not 0.0 < eps < 1.0:
            raise ValueError(f"eps fora de (0, 1): {eps}")
        if q < 1:
            raise ValueError(f"q deve ser positivo: {q}")

        rows, factor_applied = 2, resolution_factor <= 1
        for _ in range(self.max_doublings + int(math.log2(max(1, resolution_factor))) + 1):
            h = self.ergodic_box_exchange(q, eps, kind, rows)
            certificate = self.certify_ergodic(h, q, eps)
            logger.debug(
                f"Kicker ergódico q={q} R={rows}: max d_K {certificate.max_distance:.4g} "
                f"(tolerância {certificate.tolerance:.4g})"
            )

            if certificate.passed and factor_applied:
                logger.info(f"Kicker ergódico q={q}, ε={eps}: {certificate.boxes} caixas, R={rows}")
                return h, certificate
            if certificate.passed:
                rows *= next_power_of_two(resolution_factor)
                factor_applied = True
            else:
                rows *= 2

        raise ResolutionExceeded(
            f"Kicker ergódico q={q}, ε={eps}: certificado não atingido em {self.max_doublings} duplicações",
            details={"rows": rows, "cap": self.box_cap, "q": q},
        )

    def pearl_layout(
        self, q: int, eps0: float, kind: SurfaceKind, resolution_factor: int = 1
    ) -> Tuple[int, int, float]:
        """(blocos por círculo, linhas, diâmetro) com altura de bloco ≤ ε₀/2 e diâmetro ≤ ε₀·escala."""
        margin = eps0 / 4.0
        band_low, band_high = -1.0 + margin, 1.0 - margin
        block_rows = math.ceil((band_high - band_low) / (eps0 / 2.0)) * resolution_factor
        bound = eps0 * tolerance_scale(kind)

        n_blocks = q
        diameter = cell_radius(kind, n_blocks, block_rows, band_low, band_high)
        while diameter > bound:
            n_blocks *= 2
            self._check_cap(n_blocks * block_rows, f"Blocos do kicker de emergência q={q}")
            diameter = cell_radius(kind, n_blocks, block_rows, band_low, band_high)
        return n_blocks, block_rows, diameter

    def pearl_colors(self, target_mass: float, min_colors: int, resolution_factor: int = 1) -> int:
        """Menor número de cores com 1/cores ≤ massa alvo, multiplicado por resolution_factor."""
        needed = math.ceil(1.0 / target_mass) if target_mass > 1.0 / self.box_cap else self.box_cap + 1
        colors = max(min_colors, needed) * resolution_factor
        self._check_cap(colors * colors, f"Kicker de emergência com {colors} cores", colors=colors)
        return colors

    def build_emergence_kicker(
        self,
        q: int,
        eps0: float,
        eta0: float,
        colors: int,
        kind: SurfaceKind,
        rank: int = 2,
        resolution_factor: int = 1,
        target_mass: Optional[float] = None,
        target_distance: Optional[float] = None,
    ) -> Tuple[BoxExchange, SeparationCertificate]:
        """
        Kicker de pérolas com colors faixas por bloco. Com target_distance, o certificado traz também a
        maior massa de d_K(g_*μ_y, g_*μ_y') ≤ target_distance em 𝕀_ε₀, a comparar com target_mass.
        """
        if not 0.0 < eps0 < 1.0:
            raise ValueError(f"eps0 fora de (0, 1): {eps0}")
        if not 0.0 < eta0 < 1.0:
            raise ValueError(f"eta0 fora de (0, 1): {eta0}")
        if colors < 2:
            raise ValueError(f"colors deve ser ao menos 2: {colors}")

        kind = SurfaceKind(kind)
        size = colors * rank
        n_blocks, block_rows, diameter = self.pearl_layout(q, eps0, kind, resolution_factor)
        n_theta, n_y = n_blocks * size, block_rows * size
        self._check_cap(n_theta * n_y, f"Kicker de emergência q={q}, ε₀={eps0}")

        spec = BoxExchangeSpec(
            n_theta=n_theta,
            n_y=n_y,
            perm=pearl_permutation(n_blocks, block_rows, colors, rank),
            q_equivariance=q,
            y_margin=eps0 / 4.0,
        )
        g = BoxExchange(kind, spec)

        profile_rows = max(self.separation_service.y_grid, next_power_of_two(2 * colors))
        matrix, y_values = self.separation_service.separation_profile(
            g, y_grid=profile_rows, m=n_theta, order=n_blocks
        )
        eta_meas, rows_y, masses = self.separation_service.measured_separation(matrix, y_values, eps0, eta0, colors)
        mass_at_target = None
        if target_distance is not None:
            rows = self.separation_service.interior_rows(y_values, eps0)
            mass_at_target = float(self.separation_service.row_masses(matrix, rows, target_distance).max())
        logger.info(
            f"Kicker de emergência q={q}, ε₀={eps0}: {spec.box_count} caixas, η medido {eta_meas:.4g}, "
            f"massa máxima {masses.max():.4g}"
        )

        certificate = SeparationCertificate(
            q=q,
            eps0=eps0,
            eta0=eta0,
            colors=colors,
            surface=kind,
            eta_meas=eta_meas,
            y_values=rows_y.tolist(),
            masses=masses.tolist(),
            max_mass=float(masses.max()),
            displacement_bound=diameter,
            block_rows=block_rows,
            blocks_per_domain=n_blocks // q,
            rows_per_block=size,
            profile_rows=profile_rows,
            target_distance=target_distance,
            target_mass=target_mass,
            mass_at_target=mass_at_target,
        )
        return g, certificate

import logging
from dataclasses import replace
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import numpy as np
from abc_lab_shared.domain.entities import (
    BoxExchange,
    DiscreteMeasure,
    LedgerEntry,
    MapExpr,
    SchemeState,
    conjugated_rotation,
    ergodic_epsilon,
)
from abc_lab_shared.domain.enums import SchemeMode
from abc_lab_shared.domain.exceptions import StageFailed
from abc_lab_shared.domain.models import RunConfig
from abc_lab_shared.geometry import chart_sample, pointwise_distances, stream_rng, to_surface, tolerance_scale

from src.processor.services.kicker_service import KickerService, ergodic_box_count, next_power_of_two
from src.processor.services.map_service import MapService
from src.processor.services.transport_service import TransportService
from src.processor.usecase.alpha_selection import alpha_step, choose_next_alpha
from src.processor.usecase.stage_support import (
    check_entry,
    compose_conjugacy,
    first_failure,
    halvings_entry,
    rational_details,
    record_entry,
    stage_tag,
)
from src.processor.utils.parallel import parallel_map
from src.processor.utils.retry_handler import retry_with_escalation

logger = logging.getLogger(__name__)


class ErgodicSchemeUseCase:
    def __init__(
        self,
        map_service: MapService,
        transport_service: TransportService,
        kicker_service: KickerService,
        config: RunConfig,
    ):
        self.map_service = map_service
        self.transport_service = transport_service
        self.kicker_service = kicker_service
        self.config = config
        self.resolution_retries = config.scheme.resolution_retries
        self.alpha_retries = config.scheme.alpha_retries

    @retry_with_escalation()
    def step(
        self,
        state: SchemeState,
        resolution_factor: int = 1,
        denominator_factor: int = 1,
        next_rows: Optional[int] = None,
    ) -> SchemeState:
        if state.mode is not SchemeMode.ERGODIC:
            raise ValueError(f"Estado em modo {state.mode.value}, esperado ergodic")

        stage = state.n + 1
        kind = state.kind
        eps = state.eps
        scheme = self.config.scheme
        seed = self.config.seeds.sampling
        logger.info(f"Estágio ergódico {stage}: q={state.q}, ε={eps}, resolução x{resolution_factor}")

        q_bilip = self.map_service.bilipschitz_estimate(
            state.h, scheme.bilipschitz_samples, seed, same_piece_only=True
        )
        eta_small = eps / (16.0 * q_bilip)
        kicker, certificate = self.kicker_service.build_ergodic_kicker(state.q, eta_small, kind, resolution_factor)
        h_hat = compose_conjugacy(state.h, kicker)
        next_rows = self.next_kicker_rows(stage, kicker, resolution_factor, next_rows)

        entries: List[LedgerEntry] = [
            record_entry("bilipschitz", stage, q_bilip),
            check_entry(
                "kicker_certificate",
                stage,
                certificate.max_distance,
                certificate.tolerance,
                **certificate.model_dump(mode="json"),
            ),
        ]

        nu = Fraction(eps) / 4
        min_denominator = (state.q + 1) * denominator_factor
        failures: Dict[str, int] = {}
        rejected = Fraction(0)
        for halving in range(scheme.max_nu_halvings + 1):
            alpha_hat = choose_next_alpha(state.alpha, nu, min_denominator)
            checks = self.check_conditions(state, stage, h_hat, alpha_hat, next_rows)
            failed = first_failure(checks)
            if failed is None:
                break

            failures[failed.condition_id] = failures.get(failed.condition_id, 0) + 1
            logger.info(
                f"Estágio {stage}: α̂={alpha_hat} rejeitado em {failed.condition_id} com ν={float(nu):.3e} "
                f"(medido {failed.measured:.4g}, limite {failed.bound:.4g})"
            )
            # Reduzir ν só aumenta o denominador de α̂
            if failed.condition_id == "next_kicker_fits" or halving == scheme.max_nu_halvings:
                logger.warning(f"Estágio {stage}: {failed.condition_id} não atendida após {halving} reduções de ν")
                raise StageFailed(
                    failed.condition_id, stage, ledger=entries + [halvings_entry(stage, failures)] + checks
                )
            rejected = alpha_hat
            nu /= 2

        if rejected:
            alpha_hat, nu, checks = self.smallest_passing_alpha(
                state, stage, h_hat, rejected, (alpha_hat, nu, checks), min_denominator, next_rows
            )

        new_eps = ergodic_epsilon(stage)
        entries.append(halvings_entry(stage, failures))
        entries += checks
        entries += [
            record_entry("nu", stage, float(nu), **rational_details(nu)),
            record_entry("alpha", stage, float(alpha_hat), **rational_details(alpha_hat)),
            record_entry("tail_bound", stage, new_eps),
        ]
        logger.info(f"Estágio ergódico {stage} aceito: α̂={alpha_hat}, ν={float(nu):.3e}")
        return replace(
            state, n=stage, h=h_hat, alpha=alpha_hat, eps=new_eps, nu=nu, ledger=state.ledger + tuple(entries)
        )

    def next_kicker_rows(
        self, stage: int, kicker: BoxExchange, resolution_factor: int, next_rows: Optional[int]
    ) -> Optional[int]:
        """Menor R esperado para o kicker do próximo estágio; None no último estágio."""
        if next_rows is None and stage >= self.config.stages:
            return None
        base_rows = max(2, kicker.spec.n_y // next_power_of_two(resolution_factor))
        return max(base_rows, next_rows or 0)

    def smallest_passing_alpha(
        self,
        state: SchemeState,
        stage: int,
        h_hat: MapExpr,
        rejected: Fraction,
        accepted: Tuple[Fraction, Fraction, List[LedgerEntry]],
        min_denominator: int,
        next_rows: Optional[int],
    ) -> Tuple[Fraction, Fraction, List[LedgerEntry]]:
        """Bisseção em k entre o último α̂ = α + 1/(k·q) rejeitado e o aceito, buscando o menor denominador."""
        low, high = alpha_step(state.alpha, rejected), alpha_step(state.alpha, accepted[0])
        while high - low > 1:
            middle = (low + high) // 2
            trial_nu = Fraction(1, (middle - 1) * state.q)
            trial = choose_next_alpha(state.alpha, trial_nu, min_denominator)
            k = alpha_step(state.alpha, trial)
            if k >= high:
                low = middle
                continue

            checks = self.check_conditions(state, stage, h_hat, trial, next_rows)
            if first_failure(checks) is None:
                high, accepted = k, (trial, trial_nu, checks)
            else:
                low = k
        logger.info(f"Estágio {stage}: menor α̂ aceito na bisseção: {accepted[0]}")
        return accepted

    def check_conditions(
        self,
        state: SchemeState,
        stage: int,
        h_hat: MapExpr,
        alpha_hat: Fraction,
        next_rows: Optional[int] = None,
    ) -> List[LedgerEntry]:
        """Condições do estágio em ordem de custo, parando na primeira falha."""
        scale = tolerance_scale(state.kind)
        half = state.eps / 2.0 * scale
        f = state.f
        f_hat = conjugated_rotation(h_hat, alpha_hat)

        entries = [
            LedgerEntry(
                "denominator_increase",
                stage,
                float(alpha_hat.denominator),
                float(state.q),
                alpha_hat.denominator > state.q,
            )
        ]
        if not entries[-1].passed:
            return entries

        if next_rows is not None:
            boxes = ergodic_box_count(alpha_hat.denominator, next_rows)
            entries.append(check_entry("next_kicker_fits", stage, boxes, self.kicker_service.box_cap, rows=next_rows))
            if not entries[-1].passed:
                return entries

        c0 = self.map_service.c0_distance(f_hat, f, 0.0, self.config.scheme.c0_samples, self.config.seeds.sampling)
        entries.append(check_entry("c0_distance", stage, c0, half, strict=True))
        if not entries[-1].passed:
            return entries

        orbit_gap = self.finite_orbit_gap(state, stage, f, f_hat, half)
        entries.append(check_entry("finite_orbits", stage, orbit_gap, half, strict=True))
        if not entries[-1].passed:
            return entries

        measured, radius = self.lebesgue_gap(state, stage, h_hat, alpha_hat)
        entries.append(check_entry("equidistribution", stage, measured, half + radius, radius=radius))
        return entries

    def finite_orbit_gap(self, state: SchemeState, stage: int, f: MapExpr, f_hat: MapExpr, bound: float) -> float:
        """sup_x max_{k ≤ q} d_K(e^f_k(x), e^f̂_k(x)); o solver roda só se o acoplamento por índice não basta."""
        samples = self.config.scheme.condition_samples
        theta, y = chart_sample(stream_rng(self.config.seeds.sampling, stage_tag(stage, "orbits")), samples)
        points = to_surface(theta, y, state.kind)
        orbit = self.map_service.orbit_coords(f, points, state.q)
        orbit_hat = self.map_service.orbit_coords(f_hat, points, state.q)

        worst = 0.0
        for i in range(samples):
            gaps = pointwise_distances(state.kind, orbit[i], orbit_hat[i])
            coupling = np.cumsum(gaps) / np.arange(1, gaps.size + 1)
            for k in range(1, state.q + 1):
                value = float(coupling[k - 1])
                if value >= bound:
                    weights = np.full(k, 1.0 / k)
                    value = self.transport_service.kantorovich_value(
                        DiscreteMeasure(state.kind, orbit[i, :k], weights),
                        DiscreteMeasure(state.kind, orbit_hat[i, :k], weights),
                    )
                worst = max(worst, value)
                if worst >= bound:
                    return worst
        return worst

    def lebesgue_gap(
        self, state: SchemeState, stage: int, h_hat: MapExpr, alpha_hat: Fraction
    ) -> Tuple[float, float]:
        """max_x d_K(e^f̂(x), Leb_grid) para x em ĥ(𝕄_{ε/2}) e o raio de discretização usado."""
        rng = stream_rng(self.config.seeds.sampling, stage_tag(stage, "equidistribution"))
        theta, y = chart_sample(rng, self.config.scheme.condition_samples, eta=state.eps / 2.0)
        points = self.map_service.evaluate_coords(h_hat, to_surface(theta, y, state.kind))

        resolution = self.config.resolutions.leb_grid
        results = parallel_map(
            lambda point: self.transport_service.conjugated_orbit_to_lebesgue(h_hat, alpha_hat, point, resolution),
            list(points),
            threads=self.transport_service.threads,
        )
        return max(value for value, _ in results), max(radius for _, radius in results)

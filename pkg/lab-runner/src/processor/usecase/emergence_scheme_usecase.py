import logging
from dataclasses import replace
from fractions import Fraction
from typing import List, Optional

from abc_lab_shared.domain.entities import (
    Interval,
    Inverse,
    LedgerEntry,
    MapExpr,
    SchemeState,
    conjugated_rotation,
    emergence_epsilon,
    separation_delta,
)
from abc_lab_shared.domain.enums import SchemeMode
from abc_lab_shared.domain.exceptions import StageFailed
from abc_lab_shared.domain.models import RunConfig
from abc_lab_shared.geometry import tolerance_scale

from src.processor.services.diagnostics_service import emergence_lower_bound
from src.processor.services.kicker_service import KickerService
from src.processor.services.map_service import MapService
from src.processor.services.separation_service import SeparationService, separation_threshold
from src.processor.usecase.alpha_selection import choose_next_alpha
from src.processor.usecase.stage_support import (
    check_entry,
    compose_conjugacy,
    rational_details,
    record_entry,
)
from src.processor.utils.retry_handler import retry_with_escalation

logger = logging.getLogger(__name__)


def initial_nu(state: SchemeState) -> Fraction:
    """ν₀ = min(1/(16q), |α_n - α_{n-1}|/3); α_{n-1} é o centro do penúltimo intervalo (α₀ = 0)."""
    nu = Fraction(1, 16 * state.q)
    intervals = state.intervals.intervals
    if intervals:
        previous_alpha = Fraction(0)
        if len(intervals) >= 2:
            previous_alpha = (intervals[-2].low + intervals[-2].high) / 2
        gap = abs(state.alpha - previous_alpha)
        if gap > 0:
            nu = min(nu, gap / 3)
    return nu


class EmergenceSchemeUseCase:
    def __init__(
        self,
        map_service: MapService,
        separation_service: SeparationService,
        kicker_service: KickerService,
        config: RunConfig,
    ):
        self.map_service = map_service
        self.separation_service = separation_service
        self.kicker_service = kicker_service
        self.config = config
        self.resolution_retries = config.scheme.resolution_retries
        self.alpha_retries = config.scheme.alpha_retries

    def eta_of(self, h: MapExpr, eps_prime: float, y_grid: Optional[int] = None) -> float:
        return self.separation_service.eta_of(
            h,
            eps_prime,
            y_grid=y_grid,
            eta_grid=self.config.resolutions.eta_grid,
            threshold_scale=self.config.scheme.threshold_scale,
        )

    @retry_with_escalation()
    def step(self, state: SchemeState, resolution_factor: int = 1, denominator_factor: int = 1) -> SchemeState:
        if state.mode is not SchemeMode.EMERGENCE:
            raise ValueError(f"Estado em modo {state.mode.value}, esperado emergence")

        stage = state.n + 1
        kind = state.kind
        eps = state.eps
        scale = tolerance_scale(kind)
        scheme = self.config.scheme
        seed = self.config.seeds.sampling
        logger.info(f"Estágio de emergência {stage}: q={state.q}, ε={eps}, resolução x{resolution_factor}")

        eta_h1 = self.eta_of(state.h, 1.0)
        q_bilip = self.map_service.bilipschitz_estimate(
            state.h, scheme.bilipschitz_samples, seed, same_piece_only=True
        )
        eps_prime = eps * eta_h1 / (2.0 * q_bilip)
        eta0 = min(0.5, eta_h1 / 2.0)
        # η(ĥ, ε) ≤ η₀ exige massa ≤ 3·exp(-η₀^(-2+ε)) em toda linha
        target_mass = separation_threshold(eta0, eps, scheme.threshold_scale)
        colors = self.kicker_service.pearl_colors(target_mass, scheme.colors, resolution_factor)

        kicker, certificate = self.kicker_service.build_emergence_kicker(
            state.q,
            eps_prime,
            eta0,
            colors,
            kind,
            rank=scheme.pearl_rank,
            resolution_factor=resolution_factor,
            target_mass=target_mass,
            target_distance=q_bilip * eta0,
        )
        h_hat = compose_conjugacy(state.h, kicker)

        entries: List[LedgerEntry] = [
            record_entry("eta_h1", stage, eta_h1),
            record_entry("bilipschitz", stage, q_bilip),
            record_entry("separation_certificate", stage, certificate.eta_meas, **certificate.model_dump(mode="json")),
        ]
        entries.append(
            check_entry(
                "kicker_separation",
                stage,
                certificate.mass_at_target,
                target_mass,
                colors=colors,
                distance=certificate.target_distance,
            )
        )
        self._raise_on_failure(entries, stage)

        eta_new = self.eta_of(h_hat, eps, y_grid=certificate.profile_rows)
        entries.append(check_entry("separation_halving", stage, 2.0 * eta_new, eta_h1))
        self._raise_on_failure(entries, stage)

        delta = separation_delta(eta_h1, eps)
        region_eta = eps * delta
        samples = scheme.c0_samples
        c0_forward = self.map_service.c0_distance(h_hat, state.h, region_eta, samples, seed)
        c0_backward = self.map_service.c0_distance(
            Inverse(kind, h_hat), Inverse(kind, state.h), region_eta, samples, seed
        )
        entries.append(
            check_entry(
                "conjugacy_c0",
                stage,
                max(c0_forward, c0_backward),
                eps * eta_h1 * scale,
                forward=c0_forward,
                backward=c0_backward,
                region_eta=region_eta,
            )
        )
        self._raise_on_failure(entries, stage)
        entries.append(self.conjugacy_bound(state, stage, h_hat, eta_h1, delta, c0_forward))
        self._raise_on_failure(entries, stage)

        nu = initial_nu(state)
        min_denominator = (4 * state.q + 1) * denominator_factor
        checks: List[LedgerEntry] = []
        for _ in range(scheme.max_nu_halvings + 1):
            alpha_hat = choose_next_alpha(state.alpha, nu, min_denominator)
            checks = self.check_alpha(state, stage, h_hat, alpha_hat, nu)
            if all(entry.passed for entry in checks):
                break
            failed = next(entry for entry in checks if not entry.passed)
            logger.debug(f"Estágio {stage}: {failed.condition_id} falhou com ν={float(nu):.3e}")
            nu /= 2
        else:
            failed = next(entry for entry in checks if not entry.passed)
            logger.warning(
                f"Estágio {stage}: {failed.condition_id} não atendida após {scheme.max_nu_halvings} reduções de ν"
            )
            raise StageFailed(failed.condition_id, stage, ledger=entries + checks)
        entries += checks

        new_eps = emergence_epsilon(alpha_hat.denominator)
        new_delta = separation_delta(eta_new, eps)
        sequence = self.sequence_entries(state, stage, eta_new, new_eps, new_delta)
        if not all(entry.passed for entry in sequence):
            failed = next(entry for entry in sequence if not entry.passed)
            raise StageFailed(failed.condition_id, stage, ledger=entries + sequence)
        entries += sequence

        entries += [
            record_entry("nu", stage, float(nu), **rational_details(nu)),
            record_entry("alpha", stage, float(alpha_hat), **rational_details(alpha_hat)),
            record_entry("emergence_lower_bound", stage, emergence_lower_bound(eta_new, eps, new_eps)),
            record_entry("region_mass", stage, 1.0 - new_eps * new_delta, eps=new_eps, delta=new_delta),
        ]
        logger.info(f"Estágio de emergência {stage} aceito: α̂={alpha_hat}, η={eta_new:.4g}, δ={new_delta:.3e}")
        return replace(
            state,
            n=stage,
            h=h_hat,
            alpha=alpha_hat,
            eps=new_eps,
            eta=eta_new,
            delta=new_delta,
            eps_prev=eps,
            nu=nu,
            ledger=state.ledger + tuple(entries),
            intervals=state.intervals.append(Interval.around(alpha_hat, nu)),
        )

    def conjugacy_bound(
        self, state: SchemeState, stage: int, h_hat: MapExpr, eta_h1: float, delta: float, c0_forward: float
    ) -> LedgerEntry:
        """d_C0(ĥ, h) ≤ ε_n·η_n em 𝕄_{ε_n·δ_n}, com o par (η_n, δ_n) registrado no estado anterior."""
        eta_n = state.eta if state.eta is not None else eta_h1
        delta_n = state.delta if state.delta is not None else delta
        region_eta = state.eps * delta_n
        measured = c0_forward
        if delta_n != delta:
            measured = self.map_service.c0_distance(
                h_hat, state.h, region_eta, self.config.scheme.c0_samples, self.config.seeds.sampling
            )
        return check_entry(
            "conjugacy_bound",
            stage,
            measured,
            state.eps * eta_n * tolerance_scale(state.kind),
            eta=eta_n,
            delta=delta_n,
            region_eta=region_eta,
        )

    @staticmethod
    def _raise_on_failure(entries: List[LedgerEntry], stage: int) -> None:
        if not entries[-1].passed:
            logger.warning(
                f"Estágio {stage}: {entries[-1].condition_id} medida {entries[-1].measured:.4g} "
                f"acima de {entries[-1].bound:.4g}"
            )
            raise StageFailed(entries[-1].condition_id, stage, ledger=list(entries))

    def check_alpha(
        self, state: SchemeState, stage: int, h_hat: MapExpr, alpha_hat: Fraction, nu: Fraction
    ) -> List[LedgerEntry]:
        """Denominador > 4q, proximidade C¹ de f̂ a f e encaixe do novo intervalo, parando na primeira falha."""
        scheme = self.config.scheme
        entries = [
            LedgerEntry(
                "denominator_increase",
                stage,
                float(alpha_hat.denominator),
                float(4 * state.q),
                alpha_hat.denominator > 4 * state.q,
            )
        ]
        if not entries[-1].passed:
            return entries

        f_hat = conjugated_rotation(h_hat, alpha_hat)
        c1 = self.map_service.c1_distance(
            f_hat, state.f, 0.0, scheme.c0_samples, scheme.fd_step, self.config.seeds.sampling
        )
        entries.append(check_entry("c1_distance", stage, c1, state.eps * tolerance_scale(state.kind)))
        if not entries[-1].passed:
            return entries

        interval = Interval.around(alpha_hat, nu)
        nested = not state.intervals.intervals or state.intervals.intervals[-1].contains(interval)
        entries.append(
            LedgerEntry(
                "interval_nested",
                stage,
                float(interval.high - interval.low),
                float(4 * nu),
                nested,
                {"low": str(interval.low), "high": str(interval.high)},
            )
        )
        return entries

    @staticmethod
    def sequence_entries(
        state: SchemeState, stage: int, eta_new: float, new_eps: float, new_delta: float
    ) -> List[LedgerEntry]:
        entries = [check_entry("eps_quarter", stage, new_eps, state.eps / 4.0)]
        if state.eta is not None:
            entries.append(check_entry("eta_sequence", stage, eta_new, state.eta / 2.0))
        if state.delta is not None:
            entries.append(check_entry("delta_monotone", stage, new_delta, state.delta))
        return entries

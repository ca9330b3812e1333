import logging
import time
from typing import Dict, List, Optional, Tuple

from abc_lab_shared.domain.entities import Identity, LedgerEntry, MapExpr, SchemeState
from abc_lab_shared.domain.enums import SchemeMode
from abc_lab_shared.domain.exceptions import StageFailed
from abc_lab_shared.domain.models import RunConfig
from abc_lab_shared.geometry import tolerance_scale

from src.processor.services.kicker_service import ergodic_box_count
from src.processor.usecase.emergence_scheme_usecase import EmergenceSchemeUseCase
from src.processor.usecase.ergodic_scheme_usecase import ErgodicSchemeUseCase
from src.processor.usecase.stage_support import check_entry, record_entry

logger = logging.getLogger(__name__)

# Distância entre f_n e f_{n-1} já medida dentro de cada estágio
CAUCHY_SOURCE = {SchemeMode.ERGODIC: "c0_distance", SchemeMode.EMERGENCE: "c1_distance"}


def cauchy_entry(previous: SchemeState, current: SchemeState) -> Optional[LedgerEntry]:
    """d(f_n, f_{n-1}) ≤ ε_n (C⁰, ergódico) ou ≤ ε_{n-1} (C¹, emergência), com ε escalado pelo diâmetro."""
    source = CAUCHY_SOURCE[current.mode]
    measured = next(
        (e.measured for e in current.ledger if e.stage == current.n and e.condition_id == source),
        None,
    )
    if measured is None:
        return None
    eps = current.eps if current.mode is SchemeMode.ERGODIC else previous.eps
    return check_entry("cauchy", current.n, measured, eps * tolerance_scale(current.kind), distance=source)


class SchemeRunnerUseCase:
    def __init__(
        self,
        ergodic_usecase: ErgodicSchemeUseCase,
        emergence_usecase: EmergenceSchemeUseCase,
        config: RunConfig,
    ):
        self.ergodic_usecase = ergodic_usecase
        self.emergence_usecase = emergence_usecase
        self.config = config
        self.states: List[SchemeState] = []
        self.timings: Dict[str, float] = {}

    def run_scheme(self) -> Tuple[List[SchemeState], MapExpr]:
        mode = self.config.mode.scheme_mode()
        kind = self.config.surface
        stages = self.config.stages

        state = SchemeState.initial(kind, mode)
        self.states = [state]
        self.timings = {}

        if stages == 0:
            logger.info("Nenhum estágio solicitado: f é a identidade")
            return self.states, Identity(kind)

        usecase = self.ergodic_usecase if mode is SchemeMode.ERGODIC else self.emergence_usecase
        pending_rows: Dict[int, int] = {}
        backtracks = 0
        stage = 1
        while stage <= stages:
            started = time.perf_counter()
            try:
                if stage in pending_rows:
                    next_state = usecase.step(state, next_rows=pending_rows[stage])
                else:
                    next_state = usecase.step(state)
            except StageFailed as e:
                self.timings[f"stage_{stage}"] = time.perf_counter() - started
                rows = self.backtrack_rows(e, stage, pending_rows.get(stage - 1), backtracks)
                if rows is not None:
                    backtracks += 1
                    pending_rows[stage - 1] = rows
                    logger.warning(
                        f"Estágio {stage}: kicker precisa de R={rows}. Refazendo o estágio {stage - 1} "
                        f"com denominador compatível ({backtracks}/{self.config.scheme.max_backtracks})"
                    )
                    self.states.pop()
                    state = self.states[-1]
                    stage -= 1
                    continue
                logger.error(f"Esquema {mode.value} interrompido no estágio {stage}: {e.condition_id}")
                raise StageFailed(e.condition_id, stage, ledger=list(state.ledger) + e.ledger) from e
            self.timings[f"stage_{stage}"] = time.perf_counter() - started

            if stage in pending_rows:
                next_state = next_state.with_entries(
                    record_entry("kicker_backtrack", stage, float(pending_rows[stage]), failed_stage=stage + 1)
                )

            entry = cauchy_entry(state, next_state)
            if entry is not None:
                next_state = next_state.with_entries(entry)
                if not entry.passed:
                    self.states.append(next_state)
                    raise StageFailed("cauchy", stage, ledger=list(next_state.ledger))

            state = next_state
            self.states.append(state)
            logger.info(f"Estágio {stage}/{stages} concluído em {self.timings[f'stage_{stage}']:.2f}s: q={state.q}")
            stage += 1

        return self.states, state.f

    def backtrack_rows(
        self, error: StageFailed, stage: int, used_rows: Optional[int], backtracks: int
    ) -> Optional[int]:
        """
        R exigido pelo kicker ergódico que excedeu o limite, se o estágio anterior pode ser refeito
        com um α̂ cujo kicker seguinte caiba. None quando não há retrocesso possível.
        """
        if error.condition_id != "kicker_resolution" or stage < 2:
            return None
        if self.config.mode.scheme_mode() is not SchemeMode.ERGODIC:
            return None
        if backtracks >= self.config.scheme.max_backtracks:
            return None

        entry = next(
            (e for e in reversed(error.ledger) if e.condition_id == "kicker_resolution" and "rows" in e.details),
            None,
        )
        if entry is None:
            return None
        rows = int(entry.details["rows"])
        if used_rows is not None and rows <= used_rows:
            return None

        previous = self.states[-2]
        if ergodic_box_count(previous.q + 1, rows) > entry.bound:
            logger.info(f"Estágio {stage}: nem o menor denominador comporta R={rows}, sem retrocesso")
            return None
        return rows

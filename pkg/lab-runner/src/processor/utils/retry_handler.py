import logging
import math
from functools import wraps
from typing import Any, Callable, List, Optional, Tuple

from abc_lab_shared.domain.entities import LedgerEntry
from abc_lab_shared.domain.exceptions import ResolutionExceeded, StageFailed

from src.app.config import settings

logger = logging.getLogger(__name__)


def escalation_schedule(resolution_retries: int, alpha_retries: int) -> List[Tuple[int, int]]:
    """Pares (fator de resolução, fator de denominador) na ordem em que são tentados."""
    schedule = [(1, 1)]
    schedule += [(2**i, 1) for i in range(1, resolution_retries + 1)]
    schedule += [(2**resolution_retries, 2**j) for j in range(1, alpha_retries + 1)]
    return schedule


def resolution_entry(stage: int, attempt: int, resolution_factor: int, error: ResolutionExceeded) -> LedgerEntry:
    return LedgerEntry(
        condition_id="kicker_resolution",
        stage=stage,
        measured=float(error.details.get("boxes", math.inf)),
        bound=float(error.details.get("cap", 0)),
        passed=False,
        details={
            **error.details,
            "attempt": attempt,
            "resolution_factor": resolution_factor,
            "message": error.error_message,
        },
    )


def retry_with_escalation(
    resolution_retries: Optional[int] = None,
    alpha_retries: Optional[int] = None,
):
    """
    Reexecuta um estágio falho refinando primeiro o kicker (x2) e depois o denominador de α̂ (x2).
    Se o kicker refinado excede o limite de caixas, a resolução volta ao último fator que coube e
    seguem só os denominadores. Esgotadas as tentativas, propaga StageFailed com o ledger acumulado.
    """

    def decorator(func: Callable) -> Callable:
        @wraps(func)
        def wrapper(self, state, *args, **kwargs) -> Any:
            res_retries = resolution_retries
            if res_retries is None:
                res_retries = getattr(self, "resolution_retries", settings.MAX_RETRY_ATTEMPTS)
            den_retries = alpha_retries
            if den_retries is None:
                den_retries = getattr(self, "alpha_retries", settings.MAX_RETRY_ATTEMPTS)

            schedule = escalation_schedule(res_retries, den_retries)
            stage = state.n + 1
            history: List[LedgerEntry] = []
            last_failure: Optional[Exception] = None
            last_condition = ""
            resolution_cap: Optional[int] = None

            for attempt, (resolution_factor, denominator_factor) in enumerate(schedule):
                if resolution_cap is not None:
                    if denominator_factor == 1:
                        continue
                    resolution_factor = min(resolution_factor, resolution_cap)

                try:
                    return func(
                        self,
                        state,
                        *args,
                        resolution_factor=resolution_factor,
                        denominator_factor=denominator_factor,
                        **kwargs,
                    )

                except ResolutionExceeded as e:
                    history = history + [resolution_entry(stage, attempt, resolution_factor, e)]
                    last_failure, last_condition = e, "kicker_resolution"
                    if resolution_factor == 1:
                        logger.error(f"Estágio {stage}: kicker excedeu o limite de resolução: {e.error_message}")
                        raise StageFailed("kicker_resolution", stage, ledger=history) from e

                    resolution_cap = resolution_factor // 2
                    logger.warning(
                        f"Estágio {stage}: kicker com resolução x{resolution_factor} excedeu o limite. "
                        f"Seguindo com resolução x{resolution_cap} e denominadores maiores"
                    )

                except StageFailed as e:
                    last_failure, last_condition = e, e.condition_id
                    history = list(e.ledger)

                    if attempt < len(schedule) - 1:
                        next_resolution, next_denominator = schedule[attempt + 1]
                        logger.warning(
                            f"Tentativa {attempt + 1}/{len(schedule)} do estágio {stage} falhou em "
                            f"{e.condition_id}. Nova tentativa com resolução x{next_resolution} "
                            f"e denominador x{next_denominator}"
                        )
                    else:
                        logger.error(
                            f"Todas as {len(schedule)} tentativas falharam para o estágio {stage}. "
                            f"Última condição: {e.condition_id}"
                        )

            raise StageFailed(last_condition, stage, ledger=history) from last_failure

        return wrapper

    return decorator

from typing import Any, Dict, Iterable, Optional

from abc_lab_shared.domain.entities import Compose, Identity, LedgerEntry, MapExpr


def compose_conjugacy(h: MapExpr, kicker: MapExpr) -> MapExpr:
    """ĥ = h∘kicker, sem carregar a identidade inicial na árvore."""
    if isinstance(h, Identity):
        return kicker
    return Compose(h.kind, h, kicker)


def stage_tag(stage: int, name: str) -> str:
    return f"stage{stage}:{name}"


def check_entry(
    condition_id: str, stage: int, measured: float, bound: float, strict: bool = False, **details: Any
) -> LedgerEntry:
    passed = measured < bound if strict else measured <= bound
    return LedgerEntry(condition_id, stage, float(measured), float(bound), bool(passed), dict(details))


def record_entry(condition_id: str, stage: int, value: float, **details: Any) -> LedgerEntry:
    """Valor informativo: sempre aprovado, com o próprio valor como limite."""
    return LedgerEntry(condition_id, stage, float(value), float(value), True, dict(details))


def rational_details(value) -> Dict[str, int]:
    return {"p": value.numerator, "q": value.denominator}


def first_failure(entries: Iterable[LedgerEntry]) -> Optional[LedgerEntry]:
    return next((entry for entry in entries if not entry.passed), None)


def halvings_entry(stage: int, failures: Dict[str, int]) -> LedgerEntry:
    """Reduções de ν do estágio, com a contagem por condição que as causou."""
    return record_entry("nu_halvings", stage, sum(failures.values()), **failures)

import csv
import io
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from abc_lab_shared.domain.entities import Interval, LedgerEntry, SchemeState
from abc_lab_shared.domain.models import (
    EmergenceReport,
    IntervalModel,
    LedgerEntryModel,
    RationalModel,
    StageLedger,
)

CURVE_HEADER = ["scale", "sample_id", "mass", "integrand", "floored"]


def to_plain(value: Any) -> Any:
    """Converte escalares e arrays numpy (e Fractions) em tipos serializáveis em JSON."""
    if isinstance(value, Fraction):
        return {"p": value.numerator, "q": value.denominator}
    if isinstance(value, np.ndarray):
        return [to_plain(v) for v in value.tolist()]
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    return value


class ReportMapper:
    @staticmethod
    def rational_to_model(value: Fraction) -> RationalModel:
        return RationalModel(p=value.numerator, q=value.denominator)

    @staticmethod
    def entry_to_model(entry: LedgerEntry) -> LedgerEntryModel:
        return LedgerEntryModel(
            condition_id=entry.condition_id,
            stage=entry.stage,
            measured=float(entry.measured),
            bound=float(entry.bound),
            passed=bool(entry.passed),
            details=to_plain(entry.details),
        )

    @staticmethod
    def interval_to_model(interval: Interval) -> IntervalModel:
        return IntervalModel(
            low=ReportMapper.rational_to_model(interval.low),
            high=ReportMapper.rational_to_model(interval.high),
        )

    @staticmethod
    def state_to_ledger(state: SchemeState, tail_bound: Optional[float] = None) -> StageLedger:
        return StageLedger(
            stage=state.n,
            mode=state.mode,
            surface=state.kind,
            alpha=ReportMapper.rational_to_model(state.alpha),
            q=state.q,
            eps=state.eps,
            eta=state.eta,
            delta=state.delta,
            nu=None if state.nu is None else ReportMapper.rational_to_model(state.nu),
            tail_bound=tail_bound,
            passed=state.passed,
            entries=[ReportMapper.entry_to_model(entry) for entry in state.ledger],
            intervals=[ReportMapper.interval_to_model(i) for i in state.intervals.intervals],
        )

    @staticmethod
    def curves_to_csv(reports: Sequence[EmergenceReport]) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(CURVE_HEADER)
        for report in reports:
            for sample_id, (mass, integrand, floored) in enumerate(
                zip(report.masses, report.integrands, report.floored)
            ):
                writer.writerow([repr(report.eps), sample_id, repr(mass), repr(integrand), int(floored)])
        return buffer.getvalue()

    @staticmethod
    def curves_from_csv(text: str) -> List[Dict[str, Any]]:
        reader = csv.DictReader(io.StringIO(text))
        if reader.fieldnames != CURVE_HEADER:
            raise ValueError(f"Cabeçalho de curvas inválido: {reader.fieldnames}")
        return [
            {
                "scale": float(row["scale"]),
                "sample_id": int(row["sample_id"]),
                "mass": float(row["mass"]),
                "integrand": float(row["integrand"]),
                "floored": bool(int(row["floored"])),
            }
            for row in reader
        ]

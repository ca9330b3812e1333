import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from abc_lab_shared.domain.entities import DiscreteMeasure, MapExpr, SchemeState, TransportPlan
from abc_lab_shared.domain.models import EmergenceReport, RunConfig, RunManifest
from abc_lab_shared.mappers import MapExprMapper, MeasureMapper, ReportMapper, to_plain
from pydantic import BaseModel

logger = logging.getLogger(__name__)


class ArtifactRepository:
    """Arquivos de uma execução. JSON ordenado e sem carimbo de tempo, para que reexecuções sejam idênticas."""

    def __init__(self, output_dir: str):
        self.output_dir = Path(output_dir)
        self.files: List[str] = []

    def _path(self, name: str) -> Path:
        path = self.output_dir / name
        path.parent.mkdir(parents=True, exist_ok=True)
        return path

    def write_text(self, name: str, text: str) -> Path:
        path = self._path(name)
        try:
            path.write_text(text, encoding="utf-8")
        except OSError as e:
            logger.exception(f"Erro ao gravar artefato {path}: {e}")
            raise
        if name not in self.files:
            self.files.append(name)
        logger.debug(f"Artefato gravado: {path}")
        return path

    def write_json(self, name: str, data: Any) -> Path:
        if isinstance(data, BaseModel):
            data = data.model_dump(mode="json")
        return self.write_text(name, json.dumps(to_plain(data), indent=2, sort_keys=True) + "\n")

    def write_stage_ledgers(self, states: Sequence[SchemeState]) -> List[Path]:
        """Um ledger por estágio concluído, só com as entradas daquele estágio."""
        paths = []
        for state in states[1:]:
            ledger = ReportMapper.state_to_ledger(state, tail_bound=self._tail_bound(state))
            ledger.entries = [entry for entry in ledger.entries if entry.stage == state.n]
            ledger.passed = all(entry.passed for entry in ledger.entries)
            paths.append(self.write_json(f"ledger/stage_{state.n:02d}.json", ledger))
        return paths

    @staticmethod
    def _tail_bound(state: SchemeState) -> Optional[float]:
        for entry in state.ledger:
            if entry.stage == state.n and entry.condition_id == "tail_bound":
                return entry.measured
        return None

    def write_failure_ledger(self, stage: int, condition_id: str, entries: Sequence[Any]) -> Path:
        return self.write_json(
            f"ledger/stage_{stage:02d}_failed.json",
            {
                "stage": stage,
                "condition_id": condition_id,
                "passed": False,
                "entries": [
                    ReportMapper.entry_to_model(e).model_dump(mode="json") for e in entries if e.stage == stage
                ],
            },
        )

    def write_map(self, expr: MapExpr, name: str = "map.json") -> Path:
        return self.write_text(name, MapExprMapper.to_json(expr) + "\n")

    def write_timings(self, timings: Dict[str, float]) -> Path:
        return self.write_json("timings.json", timings)

    def write_curves(self, reports: Sequence[EmergenceReport]) -> Path:
        return self.write_text("emergence_curves.csv", ReportMapper.curves_to_csv(reports))

    def write_separation_profile(self, matrix: np.ndarray, y_values: np.ndarray) -> Path:
        return self.write_text("separation_profile.csv", MeasureMapper.matrix_to_csv(matrix, y_values))

    def write_manifest(self, manifest: RunManifest) -> Path:
        manifest.files = sorted(set(self.files) | {"manifest.json"})
        return self.write_json("manifest.json", manifest)

    @staticmethod
    def write_plan(path: str, plan: TransportPlan) -> Path:
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(json.dumps(MeasureMapper.plan_to_dict(plan), indent=2) + "\n", encoding="utf-8")
        logger.info(f"Plano de transporte gravado em {target}")
        return target

    @staticmethod
    def read_config(path: str) -> RunConfig:
        text = Path(path).read_text(encoding="utf-8")
        return RunConfig.model_validate(json.loads(text))

    @staticmethod
    def read_measure(path: str) -> DiscreteMeasure:
        return MeasureMapper.measure_from_json(Path(path).read_text(encoding="utf-8"))

    @staticmethod
    def read_map(path: str) -> MapExpr:
        return MapExprMapper.from_json(Path(path).read_text(encoding="utf-8"))

import csv
import io
import json
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from abc_lab_shared.domain.entities import DiscreteMeasure, TransportPlan
from abc_lab_shared.domain.enums import SurfaceKind


class MeasureMapper:
    @staticmethod
    def measure_to_dict(measure: DiscreteMeasure) -> Dict[str, Any]:
        return {
            "surface": measure.kind.value,
            "points": measure.points.tolist(),
            "weights": measure.weights.tolist(),
        }

    @staticmethod
    def measure_from_dict(data: Dict[str, Any]) -> DiscreteMeasure:
        try:
            kind = SurfaceKind(data["surface"])
            points = np.asarray(data["points"], dtype=float)
            weights = data.get("weights")
        except KeyError as e:
            raise ValueError(f"Campo obrigatório ausente na medida: {e}") from e
        return DiscreteMeasure(kind, points, None if weights is None else np.asarray(weights, dtype=float))

    @staticmethod
    def measure_to_json(measure: DiscreteMeasure) -> str:
        return json.dumps(MeasureMapper.measure_to_dict(measure), indent=2)

    @staticmethod
    def measure_from_json(text: str) -> DiscreteMeasure:
        return MeasureMapper.measure_from_dict(json.loads(text))

    @staticmethod
    def plan_to_dict(plan: TransportPlan) -> Dict[str, Any]:
        return {
            "objective": plan.objective,
            "triples": [{"source": i, "target": j, "mass": m} for i, j, m in plan.triples()],
        }

    @staticmethod
    def plan_from_dict(data: Dict[str, Any]) -> TransportPlan:
        triples = data.get("triples", [])
        return TransportPlan(
            sources=np.array([t["source"] for t in triples], dtype=np.int64),
            targets=np.array([t["target"] for t in triples], dtype=np.int64),
            masses=np.array([t["mass"] for t in triples], dtype=float),
            objective=float(data["objective"]),
        )

    @staticmethod
    def matrix_to_csv(matrix: np.ndarray, y_values: Optional[Sequence[float]] = None) -> str:
        """Matriz de d_K com linha/coluna = índices da grade em y."""
        matrix = np.asarray(matrix, dtype=float)
        rows, cols = matrix.shape
        if y_values is None:
            y_values = [float("nan")] * rows

        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["y_index", "y"] + [f"d_{j}" for j in range(cols)])
        for i in range(rows):
            writer.writerow([i, repr(float(y_values[i]))] + [repr(float(v)) for v in matrix[i]])
        return buffer.getvalue()

    @staticmethod
    def matrix_from_csv(text: str) -> Tuple[np.ndarray, np.ndarray]:
        reader = csv.reader(io.StringIO(text))
        header = next(reader)
        if header[:2] != ["y_index", "y"]:
            raise ValueError(f"Cabeçalho de matriz inválido: {header[:2]}")
        y_values, rows = [], []
        for row in reader:
            if not row:
                continue
            y_values.append(float(row[1]))
            rows.append([float(v) for v in row[2:]])
        return np.array(rows, dtype=float), np.array(y_values, dtype=float)

import json
from fractions import Fraction

import numpy as np
import pytest
from abc_lab_shared.domain.entities import (
    BoxExchange,
    BoxExchangeSpec,
    Identity,
    LedgerEntry,
    Rotation,
    SchemeState,
    TransportPlan,
    conjugated_rotation,
)
from abc_lab_shared.domain.enums import SchemeMode, SurfaceKind
from abc_lab_shared.domain.models import EmergenceReport, RunConfig
from abc_lab_shared.mappers import MapExprMapper, MeasureMapper, ReportMapper, to_plain
from pydantic import ValidationError


class TestMapExprMapper:
    def test_rational_rotation_is_written_exactly(self):
        data = MapExprMapper.to_dict(Rotation(SurfaceKind.ANNULUS, Fraction(1, 3)))

        assert data["surface"] == "annulus"
        assert data["map"] == {"node": "rotation", "alpha": {"p": 1, "q": 3}}

    def test_real_rotation(self):
        data = MapExprMapper.to_dict(Rotation(SurfaceKind.DISK, 0.125))

        assert data["map"]["alpha"] == {"real": 0.125}

    def test_conjugate_with_kicker_survives_json(self):
        kind = SurfaceKind.SPHERE
        spec = BoxExchangeSpec(n_theta=4, n_y=2, perm=[1, 0, 3, 2, 4, 5, 6, 7], q_equivariance=2, y_margin=0.05)
        expr = conjugated_rotation(BoxExchange(kind, spec) @ Identity(kind), Fraction(5, 8))

        assert MapExprMapper.from_json(MapExprMapper.to_json(expr)) == expr

    def test_unknown_node(self):
        with pytest.raises(ValueError, match="desconhecido"):
            MapExprMapper.from_json('{"version": 1, "surface": "annulus", "map": {"node": "spiral"}}')

    def test_missing_surface(self):
        with pytest.raises(ValueError):
            MapExprMapper.from_json('{"version": 1, "map": {"node": "identity"}}')

    def test_zero_denominator(self):
        with pytest.raises(ValueError):
            MapExprMapper.rotation_number_from_dict({"p": 1, "q": 0})


class TestMeasureMapper:
    def test_measure_from_dict_requires_points(self):
        with pytest.raises(ValueError):
            MeasureMapper.measure_from_dict({"surface": "disk"})

    def test_measure_without_weights_is_uniform(self):
        measure = MeasureMapper.measure_from_json(json.dumps({"surface": "disk", "points": [[0.1, 0.0], [0.0, 0.2]]}))

        assert measure.weights.tolist() == [0.5, 0.5]

    def test_plan_dict(self):
        plan = TransportPlan.from_matrix(np.array([[0.5, 0.0], [0.0, 0.5]]), objective=0.0)

        data = MeasureMapper.plan_to_dict(plan)

        assert data["triples"] == [{"source": 0, "target": 0, "mass": 0.5}, {"source": 1, "target": 1, "mass": 0.5}]
        assert MeasureMapper.plan_from_dict(data).triples() == plan.triples()

    def test_matrix_csv_header(self):
        text = MeasureMapper.matrix_to_csv(np.zeros((2, 2)), [-0.5, 0.5])

        assert text.splitlines()[0] == "y_index,y,d_0,d_1"
        matrix, y_values = MeasureMapper.matrix_from_csv(text)
        assert matrix.shape == (2, 2)
        assert y_values.tolist() == [-0.5, 0.5]

    def test_matrix_csv_rejects_foreign_header(self):
        with pytest.raises(ValueError):
            MeasureMapper.matrix_from_csv("row,value\n0,1\n")


class TestReportMapper:
    def test_curves_csv(self):
        report = EmergenceReport(
            eps=0.25,
            q=3,
            samples=2,
            masses=[0.5, 0.0],
            integrands=[0.0, 1.0],
            floored=[False, True],
            mean_integrand=0.5,
            slack=0.0,
        )

        text = ReportMapper.curves_to_csv([report])
        rows = ReportMapper.curves_from_csv(text)

        assert text.splitlines()[0] == "scale,sample_id,mass,integrand,floored"
        assert rows[1] == {"scale": 0.25, "sample_id": 1, "mass": 0.0, "integrand": 1.0, "floored": True}

    def test_curves_csv_rejects_foreign_header(self):
        with pytest.raises(ValueError):
            ReportMapper.curves_from_csv("a,b\n1,2\n")

    def test_state_to_ledger(self):
        state = SchemeState.initial(SurfaceKind.DISK, SchemeMode.ERGODIC).with_entries(
            LedgerEntry("c0_distance", 0, 0.1, 0.5, True, {"samples": np.int64(4)})
        )

        ledger = ReportMapper.state_to_ledger(state, tail_bound=0.25)

        assert ledger.alpha.p == 0 and ledger.alpha.q == 1
        assert ledger.tail_bound == 0.25
        assert ledger.entries[0].details == {"samples": 4}
        assert ledger.passed


def test_to_plain():
    value = {1: Fraction(2, 3), "array": np.array([1.5, 2.5]), "scalar": np.float64(0.5), "items": (np.int32(1),)}

    assert to_plain(value) == {"1": {"p": 2, "q": 3}, "array": [1.5, 2.5], "scalar": 0.5, "items": [1]}


class TestRunConfig:
    def test_defaults(self):
        config = RunConfig.model_validate({"mode": "ergodic", "surface": "annulus"})

        assert config.stages == 0
        assert config.scheme.colors == 2
        assert config.output_dir == "runs/latest"

    def test_rejects_unknown_fields(self):
        with pytest.raises(ValidationError):
            RunConfig.model_validate({"mode": "ergodic", "surface": "annulus", "bogus": 1})

    def test_rejects_unknown_surface(self):
        with pytest.raises(ValidationError):
            RunConfig.model_validate({"mode": "ergodic", "surface": "torus"})

    def test_lebesgue_grid_must_fit_support_cap(self):
        with pytest.raises(ValidationError, match="support_cap"):
            RunConfig.model_validate(
                {"mode": "diagnose", "surface": "disk", "resolutions": {"leb_grid": 64, "support_cap": 1024}}
            )

    def test_scales_are_sorted_descending(self):
        config = RunConfig.model_validate(
            {"mode": "diagnose", "surface": "disk", "diagnostics": {"scales": [0.1, 0.5, 0.25]}}
        )

        assert config.diagnostics.scales == [0.5, 0.25, 0.1]

    def test_rejects_non_positive_scales(self):
        with pytest.raises(ValidationError):
            RunConfig.model_validate({"mode": "diagnose", "surface": "disk", "diagnostics": {"scales": [0.1, 0.0]}})

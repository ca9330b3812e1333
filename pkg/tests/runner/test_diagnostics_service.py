import math
from fractions import Fraction

import numpy as np
import pytest
from abc_lab_shared.domain.entities import Identity, SchemeState, conjugated_rotation
from abc_lab_shared.domain.enums import SchemeMode, SurfaceKind
from abc_lab_shared.domain.exceptions import SupportTooLarge
from abc_lab_shared.geometry import chart_sample, stream_rng, to_surface

from src.processor.services.diagnostics_service import (
    DiagnosticsService,
    emergence_integrands,
    emergence_lower_bound,
)
from src.processor.services.transport_service import TransportService


@pytest.fixture
def diagnostics(transport_service, separation_service):
    return DiagnosticsService(transport_service, separation_service)


def test_emergence_lower_bound():
    expected = math.log(4.0 - math.log(3.25)) / math.log(4.0)

    assert emergence_lower_bound(0.5, 0.0, 0.25) == pytest.approx(expected)


def test_emergence_lower_bound_discounts_previous_eps():
    assert emergence_lower_bound(0.5, 0.5, 0.25) < emergence_lower_bound(0.5, 0.0, 0.25)


def test_emergence_integrands_clip_masses():
    masses, integrands, floored = emergence_integrands(np.array([0.0, 0.5, 1.0]), 0.5, 4)

    assert masses.tolist() == [0.25, 0.5, 0.75]
    assert floored.tolist() == [True, False, True]
    assert integrands[1] == pytest.approx(math.log(math.log(2.0)) / math.log(2.0))


def test_ergodicity_report_refuses_long_orbits(map_service, separation_service):
    diagnostics = DiagnosticsService(TransportService(map_service, support_cap=64, threads=1), separation_service)
    f = conjugated_rotation(Identity(SurfaceKind.ANNULUS), Fraction(1, 100))

    with pytest.raises(SupportTooLarge):
        diagnostics.ergodicity_report(f, 100, 0.0, 4, 8, seed=1)


def test_ergodicity_report_of_rational_rotation(diagnostics):
    f = conjugated_rotation(Identity(SurfaceKind.ANNULUS), Fraction(1, 8))

    report = diagnostics.ergodicity_report(f, 8, 0.1, 4, 8, seed=1, threshold=1.0)

    assert report.q == 8
    assert len(report.distances) == 4
    assert report.max_distance <= 0.5
    assert report.fraction_below == 1.0
    assert report.radius > 0.0


def test_ergodicity_report_is_reproducible(diagnostics):
    f = conjugated_rotation(Identity(SurfaceKind.DISK), Fraction(1, 5))

    first = diagnostics.ergodicity_report(f, 5, 0.0, 3, 8, seed=9)
    second = diagnostics.ergodicity_report(f, 5, 0.0, 3, 8, seed=9)

    assert first.distances == second.distances
    assert first.fraction_below is None


def test_ergodicity_report_samples_the_image_of_the_region(mocker, diagnostics, make_box_exchange):
    h = make_box_exchange(SurfaceKind.ANNULUS, q=2, rows=4)
    f = conjugated_rotation(h, Fraction(1, 2))
    theta, y = chart_sample(stream_rng(3, "ergodicity"), 8, eta=0.1)
    region = to_surface(theta, y, SurfaceKind.ANNULUS)
    image = diagnostics.map_service.evaluate_coords(h, region)
    orbits = mocker.spy(diagnostics.transport_service, "orbit_measures")

    report = diagnostics.ergodicity_report(f, 2, 0.1, 8, 8, seed=3, h=h)

    assert not np.allclose(image, region)
    assert np.allclose(orbits.call_args.args[1], image)
    assert report.conjugated_region
    assert not diagnostics.ergodicity_report(f, 2, 0.1, 8, 8, seed=3).conjugated_region
    assert np.allclose(orbits.call_args.args[1], region)


def test_reports_from_matrix(diagnostics):
    matrix = np.array([[0.0, 0.2, 0.6], [0.2, 0.0, 0.6], [0.6, 0.6, 0.0]])

    reports = diagnostics.reports_from_matrix(matrix, 4, [0.5, 0.1])

    assert [r.eps for r in reports] == [0.5, 0.1]
    assert reports[0].masses[0] == pytest.approx(2.0 / 3.0)
    assert reports[1].floored == [True, True, True]
    assert reports[0].slack == pytest.approx(math.log(math.log(3.0)) / math.log(2.0))


def test_reports_from_matrix_rejects_scales(diagnostics):
    with pytest.raises(ValueError):
        diagnostics.reports_from_matrix(np.zeros((2, 2)), 1, [1.5])


def test_emergence_order_estimate_shapes(diagnostics):
    f = conjugated_rotation(Identity(SurfaceKind.SPHERE), Fraction(1, 3))

    reports = diagnostics.emergence_order_estimate(f, 3, [0.5, 0.25], 5, seed=2)

    assert len(reports) == 2
    assert all(r.samples == 5 and len(r.masses) == 5 for r in reports)
    assert all(1.0 / 5 <= m <= 4.0 / 5 for r in reports for m in r.masses)


def test_fact_emer_requires_emergence_state(diagnostics):
    state = SchemeState.initial(SurfaceKind.ANNULUS, SchemeMode.EMERGENCE)

    with pytest.raises(ValueError):
        diagnostics.fact_emer_check(state, state.h, 4, 4, seed=0)


def test_fact_emer_on_rotation_stage(diagnostics):
    state = SchemeState(
        n=1,
        h=Identity(SurfaceKind.ANNULUS),
        alpha=Fraction(1, 4),
        eps=1.0 / 16,
        mode=SchemeMode.EMERGENCE,
        eta=0.5,
        delta=math.exp(-4.0),
        eps_prev=0.25,
    )

    result = diagnostics.fact_emer_check(state, state.h, 4, 8, seed=3)

    assert result.stage == 1
    assert result.scale == 0.25
    assert len(result.masses) == 4
    assert result.bound == pytest.approx((3.0 + 1.0 / 16) * math.exp(-4.0))


def test_full_measure_fraction_of_identity(diagnostics):
    kind = SurfaceKind.ANNULUS

    single = diagnostics.full_measure_fraction([(Identity(kind), 0.2)], kind, 4000, seed=5)
    nested = diagnostics.full_measure_fraction([(Identity(kind), 0.2), (Identity(kind), 0.5)], kind, 4000, seed=5)

    assert single == pytest.approx(0.8, abs=0.05)
    assert nested == pytest.approx(0.5, abs=0.05)


def test_separation_profile_delegates(diagnostics, separation_service):
    matrix, y_values = diagnostics.separation_profile(Identity(SurfaceKind.ANNULUS), None, None)

    assert matrix.shape == (separation_service.y_grid, separation_service.y_grid)
    assert len(y_values) == separation_service.y_grid

import logging
from fractions import Fraction

import pytest
from abc_lab_shared.domain.entities import Identity, SchemeState, conjugated_rotation
from abc_lab_shared.domain.enums import SchemeMode, SurfaceKind
from abc_lab_shared.domain.exceptions import ResolutionExceeded, StageFailed
from abc_lab_shared.domain.models import KickerCertificate

from src.processor.usecase.ergodic_scheme_usecase import ErgodicSchemeUseCase


def certificate() -> KickerCertificate:
    return KickerCertificate(
        q=1,
        eps=0.03125,
        surface=SurfaceKind.ANNULUS,
        n_theta=16,
        n_y=4,
        columns_per_row=2,
        boxes=64,
        y_grid=4,
        max_distance=0.001,
        radius=0.01,
        tolerance=0.01,
        passed=True,
    )


@pytest.fixture
def kicker(make_box_exchange):
    return make_box_exchange(SurfaceKind.ANNULUS, q=1, rows=4)


@pytest.fixture
def usecase_factory(mocker, map_service, transport_service, kicker_service, make_config, kicker):
    def factory(c0=0.0, **overrides):
        usecase = ErgodicSchemeUseCase(map_service, transport_service, kicker_service, make_config(**overrides))
        mocker.patch.object(map_service, "bilipschitz_estimate", return_value=1.0)
        if isinstance(c0, list):
            mocker.patch.object(map_service, "c0_distance", side_effect=c0)
        else:
            mocker.patch.object(map_service, "c0_distance", return_value=c0)
        mocker.patch.object(kicker_service, "build_ergodic_kicker", return_value=(kicker, certificate()))
        mocker.patch.object(usecase, "finite_orbit_gap", return_value=0.0)
        mocker.patch.object(usecase, "lebesgue_gap", return_value=(0.0, 0.01))
        return usecase

    return factory


@pytest.fixture
def initial_state():
    return SchemeState.initial(SurfaceKind.ANNULUS, SchemeMode.ERGODIC)


def test_first_stage_is_accepted(usecase_factory, initial_state, kicker, kicker_service):
    usecase = usecase_factory()

    state = usecase.step(initial_state)

    assert state.n == 1
    assert state.alpha == Fraction(1, 9)
    assert state.nu == Fraction(1, 8)
    assert state.eps == 0.25
    assert state.h is kicker
    assert state.passed
    kicker_service.build_ergodic_kicker.assert_called_once_with(1, 0.5 / 16.0, SurfaceKind.ANNULUS, 1)


def test_ledger_records_every_condition(usecase_factory, initial_state):
    state = usecase_factory().step(initial_state)

    ids = [entry.condition_id for entry in state.ledger]

    assert ids == [
        "bilipschitz",
        "kicker_certificate",
        "nu_halvings",
        "denominator_increase",
        "c0_distance",
        "finite_orbits",
        "equidistribution",
        "nu",
        "alpha",
        "tail_bound",
    ]
    equidistribution = next(e for e in state.ledger if e.condition_id == "equidistribution")
    assert equidistribution.bound == pytest.approx(0.25 + 0.01)
    alpha = next(e for e in state.ledger if e.condition_id == "alpha")
    assert alpha.details == {"p": 1, "q": 9}


def test_nu_is_halved_then_the_denominator_is_bisected(usecase_factory, initial_state, map_service):
    usecase = usecase_factory(c0=[1.0, 0.0, 0.0, 0.0, 0.0])

    state = usecase.step(initial_state)

    assert state.alpha == Fraction(1, 10)
    assert state.nu == Fraction(1, 9)
    assert abs(state.alpha - Fraction(0)) < state.nu
    assert map_service.c0_distance.call_count == 5
    halvings = next(e for e in state.ledger if e.condition_id == "nu_halvings")
    assert halvings.measured == 1.0
    assert halvings.details == {"c0_distance": 1}


def test_bisection_keeps_the_smallest_passing_denominator(usecase_factory, initial_state):
    usecase = usecase_factory(c0=[1.0, 0.0, 1.0, 0.0, 1.0])

    state = usecase.step(initial_state)

    assert state.alpha == Fraction(1, 15)
    assert state.nu == Fraction(1, 14)


def test_rejected_alphas_are_logged(usecase_factory, initial_state, caplog):
    usecase = usecase_factory(c0=[1.0, 0.0, 0.0, 0.0, 0.0])

    with caplog.at_level(logging.INFO):
        usecase.step(initial_state)

    assert any("rejeitado em c0_distance" in message for message in caplog.messages)


def test_stage_fails_after_all_halvings(usecase_factory, initial_state, map_service):
    usecase = usecase_factory(c0=1.0)

    with pytest.raises(StageFailed) as error:
        usecase.step(initial_state)

    assert error.value.condition_id == "c0_distance"
    assert error.value.stage_index == 1
    assert map_service.c0_distance.call_count == 3
    assert error.value.ledger[-1].condition_id == "c0_distance"


def test_kicker_resolution_failure(usecase_factory, initial_state, kicker_service):
    usecase = usecase_factory()
    kicker_service.build_ergodic_kicker.side_effect = ResolutionExceeded("limite", details={"cap": 64})

    with pytest.raises(StageFailed) as error:
        usecase.step(initial_state)

    assert error.value.condition_id == "kicker_resolution"
    assert error.value.ledger[-1].bound == 64.0


def test_retry_refines_the_kicker(usecase_factory, initial_state, kicker_service):
    usecase = usecase_factory(
        c0=[1.0, 1.0, 1.0, 0.0],
        scheme={"resolution_retries": 1, "alpha_retries": 0, "max_nu_halvings": 2},
    )

    state = usecase.step(initial_state)

    assert state.n == 1
    assert kicker_service.build_ergodic_kicker.call_count == 2
    assert kicker_service.build_ergodic_kicker.call_args_list[1].args[3] == 2


def test_rejects_emergence_state(usecase_factory):
    with pytest.raises(ValueError):
        usecase_factory().step(SchemeState.initial(SurfaceKind.ANNULUS, SchemeMode.EMERGENCE))


def test_denominator_check_stops_early(usecase_factory, initial_state, map_service):
    usecase = usecase_factory()
    state = SchemeState(
        n=1, h=Identity(SurfaceKind.ANNULUS), alpha=Fraction(1, 9), eps=0.25, mode=SchemeMode.ERGODIC
    )

    entries = usecase.check_conditions(state, 2, state.h, Fraction(1, 3))

    assert [entry.condition_id for entry in entries] == ["denominator_increase"]
    assert not entries[0].passed
    map_service.c0_distance.assert_not_called()


def test_finite_orbit_gap_of_equal_maps(map_service, transport_service, kicker_service, make_config, initial_state):
    config = make_config(scheme={"condition_samples": 4})
    usecase = ErgodicSchemeUseCase(map_service, transport_service, kicker_service, config)
    f = conjugated_rotation(Identity(SurfaceKind.ANNULUS), Fraction(0))

    assert usecase.finite_orbit_gap(initial_state, 1, f, f, 0.25) == 0.0


def test_lebesgue_gap_of_a_rotation(map_service, transport_service, kicker_service, make_config, initial_state):
    config = make_config(scheme={"condition_samples": 3}, resolutions={"leb_grid": 8})
    usecase = ErgodicSchemeUseCase(map_service, transport_service, kicker_service, config)

    measured, radius = usecase.lebesgue_gap(initial_state, 1, Identity(SurfaceKind.ANNULUS), Fraction(1, 4))

    assert measured > 0.0
    assert radius > 0.0


def test_next_kicker_gate_stops_the_halvings(usecase_factory, initial_state, map_service):
    usecase = usecase_factory()

    with pytest.raises(StageFailed) as error:
        usecase.step(initial_state, next_rows=64)

    assert error.value.condition_id == "next_kicker_fits"
    entry = error.value.ledger[-1]
    assert entry.measured == 294912.0
    assert entry.bound == 2.0**14
    assert entry.details == {"rows": 64}
    map_service.c0_distance.assert_not_called()


def test_next_kicker_gate_is_recorded_before_the_last_stage(usecase_factory, initial_state):
    state = usecase_factory(stages=2).step(initial_state)

    gate = next(e for e in state.ledger if e.condition_id == "next_kicker_fits")

    assert gate.passed
    assert gate.measured == 288.0
    assert gate.details == {"rows": 4}


def test_last_stage_skips_the_next_kicker_gate(usecase_factory, initial_state):
    state = usecase_factory(stages=1).step(initial_state)

    assert all(e.condition_id != "next_kicker_fits" for e in state.ledger)

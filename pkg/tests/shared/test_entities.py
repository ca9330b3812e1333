import math
from fractions import Fraction

import numpy as np
import pytest
from abc_lab_shared.domain.entities import (
    AnnulusPoint,
    BoxExchange,
    BoxExchangeSpec,
    Compose,
    Conjugate,
    DiscreteMeasure,
    Identity,
    Interval,
    IntervalLedger,
    LedgerEntry,
    Rotation,
    SchemeState,
    SurfacePoint,
    TransportPlan,
    box_exchanges,
    emergence_epsilon,
    ergodic_epsilon,
    reduce_rotation,
    separation_delta,
    wrap_unit,
)
from abc_lab_shared.domain.enums import RunMode, SchemeMode, SurfaceKind
from abc_lab_shared.domain.exceptions import DomainError, KindMismatch, StageFailed


class TestBoxExchangeSpec:
    def test_rejects_non_bijection(self):
        with pytest.raises(ValueError, match="bijeção"):
            BoxExchangeSpec(n_theta=2, n_y=2, perm=[0, 0, 1, 2])

    def test_rejects_wrong_size(self):
        with pytest.raises(ValueError):
            BoxExchangeSpec(n_theta=2, n_y=2, perm=[0, 1, 2])

    def test_rejects_permutation_that_breaks_equivariance(self):
        with pytest.raises(ValueError, match="comuta"):
            BoxExchangeSpec(n_theta=4, n_y=1, perm=[1, 0, 2, 3], q_equivariance=2)

    def test_rejects_q_not_dividing_columns(self):
        with pytest.raises(ValueError):
            BoxExchangeSpec(n_theta=3, n_y=1, perm=[0, 1, 2], q_equivariance=2)

    def test_equivariant_swap_and_inverse(self):
        spec = BoxExchangeSpec(n_theta=4, n_y=1, perm=[1, 0, 3, 2], q_equivariance=2, y_margin=0.1)

        assert spec.box_count == 4
        assert spec.inverse_perm.tolist() == [1, 0, 3, 2]
        assert spec.row_height == pytest.approx(1.8)
        assert not spec.perm.flags.writeable

    def test_equality_compares_permutation(self):
        a = BoxExchangeSpec(n_theta=2, n_y=1, perm=[1, 0])
        b = BoxExchangeSpec(n_theta=2, n_y=1, perm=np.array([1, 0]))
        c = BoxExchangeSpec(n_theta=2, n_y=1, perm=[0, 1])

        assert a == b
        assert hash(a) == hash(b)
        assert a != c


def test_wrap_unit():
    assert wrap_unit(1.25) == pytest.approx(0.25)
    assert wrap_unit(-0.25) == pytest.approx(0.75)
    assert np.allclose(wrap_unit(np.array([2.0, 0.5])), [0.0, 0.5])


def test_points_validate_their_surface():
    with pytest.raises(DomainError):
        SurfacePoint(SurfaceKind.SPHERE, [1.0, 1.0, 0.0])
    with pytest.raises(DomainError):
        SurfacePoint(SurfaceKind.DISK, [0.5, 0.5, 0.5])
    with pytest.raises(DomainError):
        AnnulusPoint(0.0, 1.5)

    assert SurfacePoint(SurfaceKind.ANNULUS, [1.5, 0.0]).coords.tolist() == [0.5, 0.0]


class TestDiscreteMeasure:
    def test_defaults_to_uniform_weights(self):
        measure = DiscreteMeasure(SurfaceKind.ANNULUS, np.array([[0.1, 0.0], [0.2, 0.0]]))

        assert measure.weights.tolist() == [0.5, 0.5]

    @pytest.mark.parametrize("weights", [[0.5, 0.6], [1.5, -0.5], [1.0]])
    def test_rejects_invalid_weights(self, weights):
        with pytest.raises(DomainError):
            DiscreteMeasure(SurfaceKind.ANNULUS, np.array([[0.1, 0.0], [0.2, 0.0]]), np.array(weights))

    def test_merged_combines_duplicate_atoms(self):
        points = np.array([[0.1, 0.0], [0.2, 0.0], [0.1, 0.0]])
        measure = DiscreteMeasure(SurfaceKind.ANNULUS, points, np.array([0.25, 0.5, 0.25]))

        merged = measure.merged()

        assert len(merged) == 2
        assert sorted(merged.weights.tolist()) == [0.5, 0.5]

    def test_dirac(self):
        point = SurfacePoint(SurfaceKind.DISK, [0.3, 0.4])

        measure = DiscreteMeasure.dirac(point)

        assert len(measure) == 1
        assert measure.weights.tolist() == [1.0]


def test_transport_plan_from_matrix_keeps_positive_entries():
    plan = TransportPlan.from_matrix(np.array([[0.25, 0.25], [0.0, 0.5]]), objective=0.1)

    assert len(plan) == 3
    assert plan.triples() == [(0, 0, 0.25), (0, 1, 0.25), (1, 1, 0.5)]


class TestIntervals:
    def test_around(self):
        interval = Interval.around(Fraction(1, 2), Fraction(1, 8))

        assert interval == Interval(Fraction(1, 4), Fraction(3, 4))

    def test_nested_ledger(self):
        outer = Interval(Fraction(0), Fraction(1))
        ledger = IntervalLedger().append(outer).append(Interval(Fraction(1, 4), Fraction(1, 2)))

        assert len(ledger) == 2
        assert ledger.is_nested()
        assert not ledger.append(Interval(Fraction(1, 8), Fraction(1, 2))).is_nested()


def test_epsilon_sequences():
    assert ergodic_epsilon(0) == 0.5
    assert ergodic_epsilon(3) == 1.0 / 16
    assert emergence_epsilon(1) == 0.25
    assert emergence_epsilon(17) == 1.0 / 68


def test_separation_delta():
    assert separation_delta(0.5, 0.0) == pytest.approx(math.exp(-4.0))
    assert separation_delta(0.5, 0.25) > separation_delta(0.5, 0.0)


@pytest.mark.parametrize("mode, eps", [(SchemeMode.ERGODIC, 0.5), (SchemeMode.EMERGENCE, 0.25)])
def test_initial_state(mode, eps):
    state = SchemeState.initial(SurfaceKind.SPHERE, mode)

    assert state.n == 0
    assert state.eps == eps
    assert state.q == 1
    assert state.kind is SurfaceKind.SPHERE
    assert isinstance(state.h, Identity)
    assert isinstance(state.f, Conjugate)
    assert state.passed
    assert state.recomputed_delta() is None


def test_state_records_failed_entries():
    state = SchemeState.initial(SurfaceKind.ANNULUS, SchemeMode.ERGODIC).with_entries(
        LedgerEntry("c0_distance", 1, 0.3, 0.25, False)
    )

    assert not state.passed
    assert len(state.ledger) == 1


def test_reduce_rotation():
    assert reduce_rotation(Fraction(5, 4)) == Fraction(1, 4)
    assert reduce_rotation(Fraction(-1, 4)) == Fraction(3, 4)
    assert reduce_rotation(-0.25) == pytest.approx(0.75)


def test_compose_rejects_mixed_surfaces():
    with pytest.raises(KindMismatch):
        Compose(SurfaceKind.ANNULUS, Identity(SurfaceKind.SPHERE), Identity(SurfaceKind.ANNULUS))


def test_box_exchanges_walks_the_tree():
    spec = BoxExchangeSpec(n_theta=2, n_y=1, perm=[1, 0])
    kind = SurfaceKind.DISK
    h = BoxExchange(kind, spec) @ Identity(kind)
    expr = Conjugate(kind, h, Rotation(kind, Fraction(1, 3))).inverse()

    assert list(box_exchanges(expr)) == [spec]


def test_stage_failed_carries_ledger():
    entry = LedgerEntry("finite_orbits", 2, 0.4, 0.1, False)

    error = StageFailed("finite_orbits", 2, [entry])

    assert error.stage_index == 2
    assert error.ledger == [entry]
    assert error.error_code == "STAGE_FAILED"


def test_run_mode_maps_to_scheme_mode():
    assert RunMode.EMERGENCE.scheme_mode() is SchemeMode.EMERGENCE
    with pytest.raises(ValueError):
        RunMode.DIAGNOSE.scheme_mode()

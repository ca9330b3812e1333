from fractions import Fraction

import numpy as np
import pytest
from abc_lab_shared.domain.entities import BoxExchangeSpec, conjugated_rotation
from abc_lab_shared.domain.enums import SurfaceKind
from abc_lab_shared.domain.exceptions import ResolutionExceeded
from abc_lab_shared.domain.models import KickerCertificate

from src.processor.services.kicker_service import (
    KickerService,
    ergodic_box_count,
    ergodic_layout,
    ergodic_permutation,
    next_power_of_two,
    pearl_permutation,
)


def certificate(passed: bool) -> KickerCertificate:
    return KickerCertificate(
        q=3,
        eps=0.01,
        surface=SurfaceKind.ANNULUS,
        n_theta=6,
        n_y=2,
        columns_per_row=1,
        boxes=12,
        y_grid=4,
        max_distance=0.0 if passed else 0.5,
        radius=0.1,
        tolerance=0.01,
        passed=passed,
    )


@pytest.mark.parametrize("value, expected", [(0, 1), (1, 1), (3, 4), (4, 4), (5, 8)])
def test_next_power_of_two(value, expected):
    assert next_power_of_two(value) == expected


@pytest.mark.parametrize("q, rows, expected", [(3, 2, (2, 12)), (2, 4, (2, 16)), (1, 8, (8, 64)), (16, 4, (2, 128))])
def test_ergodic_layout(q, rows, expected):
    assert ergodic_layout(q, rows) == expected


@pytest.mark.parametrize("q, rows", [(1, 2), (2, 4), (3, 8)])
def test_ergodic_permutation_is_an_equivariant_bijection(q, rows):
    k, n_theta = ergodic_layout(q, rows)
    perm = ergodic_permutation(q, rows, k)

    assert sorted(perm.tolist()) == list(range(n_theta * rows))
    BoxExchangeSpec(n_theta=n_theta, n_y=rows, perm=perm, q_equivariance=q)


def test_ergodic_permutation_spreads_each_row_over_all_rows():
    q, rows = 1, 4
    k, n_theta = ergodic_layout(q, rows)
    perm = ergodic_permutation(q, rows, k)

    target_rows = perm[:n_theta] // n_theta

    assert set(target_rows.tolist()) == set(range(rows))


@pytest.mark.parametrize("q, rows", [(1, 4), (3, 4), (2, 8)])
def test_neighbouring_columns_stay_one_row_or_one_block_apart(q, rows):
    k, n_theta = ergodic_layout(q, rows)
    perm = ergodic_permutation(q, rows, k)

    for row in range(rows):
        target_rows, target_cols = np.divmod(perm[row * n_theta : (row + 1) * n_theta], n_theta)
        row_jump = np.abs(np.roll(target_rows, -1) - target_rows)
        step = (np.roll(target_cols, -1) - target_cols) % n_theta
        col_jump = np.minimum(step, n_theta - step)

        assert row_jump.max() <= 1
        assert col_jump.max() <= rows


def test_ergodic_permutation_needs_an_even_block_count():
    with pytest.raises(ValueError):
        ergodic_permutation(4, 4, 1)


def test_ergodic_box_count():
    assert ergodic_box_count(9, 64) == 9 * 64 * 8 * 64
    assert ergodic_box_count(100, 4) == 100 * 4 * 2 * 4


def test_snake_kicker_bounds_the_c0_jump_of_a_small_rotation(map_service, make_box_exchange):
    rows = 8
    h = make_box_exchange(SurfaceKind.ANNULUS, q=1, rows=rows)
    f = conjugated_rotation(h, Fraction(0))
    f_hat = conjugated_rotation(h, Fraction(1, 1000))

    gap = map_service.c0_distance(f_hat, f, 0.0, 4096, seed=5)

    assert gap > 1e-3
    assert gap <= 1.0 / rows + 1e-3 + 1e-9


@pytest.mark.parametrize("n_blocks, block_rows, colors, rank", [(2, 1, 2, 2), (3, 2, 3, 1)])
def test_pearl_permutation_is_an_equivariant_bijection(n_blocks, block_rows, colors, rank):
    size = colors * rank
    perm = pearl_permutation(n_blocks, block_rows, colors, rank)

    assert sorted(perm.tolist()) == list(range(n_blocks * size * block_rows * size))
    BoxExchangeSpec(n_theta=n_blocks * size, n_y=block_rows * size, perm=perm, q_equivariance=n_blocks)


def test_ergodic_box_exchange_respects_the_cap(transport_service, separation_service):
    service = KickerService(transport_service, separation_service, box_cap=64, y_grid=4)

    with pytest.raises(ResolutionExceeded):
        service.ergodic_box_exchange(3, 0.1, SurfaceKind.ANNULUS, rows=4)


def test_ergodic_box_exchange_margin(kicker_service):
    h = kicker_service.ergodic_box_exchange(2, 0.2, SurfaceKind.DISK, rows=2)

    assert h.spec.y_margin == pytest.approx(0.05)
    assert h.spec.q_equivariance == 2


def test_build_ergodic_kicker_stops_at_the_cap(mocker, transport_service, separation_service):
    service = KickerService(transport_service, separation_service, box_cap=64, y_grid=4)
    mocker.patch.object(service, "certify_ergodic", return_value=certificate(False))

    with pytest.raises(ResolutionExceeded):
        service.build_ergodic_kicker(3, 0.01, SurfaceKind.ANNULUS)


def test_build_ergodic_kicker_returns_first_certified_layout(mocker, kicker_service):
    mocker.patch.object(kicker_service, "certify_ergodic", return_value=certificate(True))

    h, cert = kicker_service.build_ergodic_kicker(3, 0.01, SurfaceKind.ANNULUS)

    assert h.spec.n_y == 2
    assert cert.passed


def test_build_ergodic_kicker_applies_resolution_factor(mocker, kicker_service):
    mocker.patch.object(kicker_service, "certify_ergodic", return_value=certificate(True))

    h, _ = kicker_service.build_ergodic_kicker(3, 0.01, SurfaceKind.ANNULUS, resolution_factor=2)

    assert h.spec.n_y == 4


@pytest.mark.parametrize("eps, q", [(0.0, 2), (1.0, 2), (0.5, 0)])
def test_build_ergodic_kicker_validates_arguments(kicker_service, eps, q):
    with pytest.raises(ValueError):
        kicker_service.build_ergodic_kicker(q, eps, SurfaceKind.ANNULUS)


@pytest.mark.slow
def test_certify_ergodic_on_a_coarse_target(kicker_service):
    h, cert = kicker_service.build_ergodic_kicker(1, 0.5, SurfaceKind.ANNULUS)

    assert cert.passed
    assert cert.max_distance <= cert.tolerance
    assert h.spec.box_count == cert.boxes


@pytest.mark.parametrize("kind", list(SurfaceKind))
def test_pearl_layout_bounds_block_diameter(kicker_service, kind):
    n_blocks, block_rows, diameter = kicker_service.pearl_layout(2, 0.25, kind)

    bound = 0.25 if kind is SurfaceKind.ANNULUS else 1.0
    assert diameter <= bound
    assert n_blocks % 2 == 0
    assert block_rows == 15


def test_pearl_layout_scales_rows(kicker_service):
    _, block_rows, _ = kicker_service.pearl_layout(2, 0.25, SurfaceKind.ANNULUS, resolution_factor=2)

    assert block_rows == 30


@pytest.mark.parametrize("eps0, eta0, colors", [(0.0, 0.5, 2), (0.5, 1.0, 2), (0.5, 0.5, 1)])
def test_build_emergence_kicker_validates_arguments(kicker_service, eps0, eta0, colors):
    with pytest.raises(ValueError):
        kicker_service.build_emergence_kicker(2, eps0, eta0, colors, SurfaceKind.ANNULUS)


def test_build_emergence_kicker_certifies_measured_separation(mocker, kicker_service):
    size = 4
    mocker.patch.object(
        kicker_service.separation_service,
        "separation_profile",
        return_value=(np.ones((size, size)) - np.eye(size), np.array([-0.75, -0.25, 0.25, 0.75])),
    )

    g, cert = kicker_service.build_emergence_kicker(2, 0.5, 0.3, 2, SurfaceKind.ANNULUS)

    assert g.spec.q_equivariance == 2
    assert cert.eta_meas <= 0.3
    assert cert.max_mass <= 0.5
    assert cert.rows_per_block == 4
    assert cert.profile_rows == 8
    assert cert.mass_at_target is None


def test_build_emergence_kicker_reports_the_mass_at_the_target_distance(mocker, kicker_service):
    size = 4
    profile = mocker.patch.object(
        kicker_service.separation_service,
        "separation_profile",
        return_value=(np.ones((size, size)) - np.eye(size), np.array([-0.75, -0.25, 0.25, 0.75])),
    )

    _, cert = kicker_service.build_emergence_kicker(
        2, 0.5, 0.3, 2, SurfaceKind.ANNULUS, target_mass=0.3, target_distance=0.5
    )

    assert cert.mass_at_target == pytest.approx(0.25)
    assert cert.target_mass == 0.3
    assert profile.call_args.kwargs["y_grid"] == 8


def test_pearl_colors_follow_the_target_mass(kicker_service):
    assert kicker_service.pearl_colors(0.6, 2) == 2
    assert kicker_service.pearl_colors(0.0208, 2) == 49
    assert kicker_service.pearl_colors(0.3, 2, resolution_factor=2) == 8


def test_pearl_colors_beyond_the_cap(kicker_service):
    with pytest.raises(ResolutionExceeded) as error:
        kicker_service.pearl_colors(1e-9, 2)

    assert error.value.details["colors"] == 2**14 + 1

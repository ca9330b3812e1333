import numpy as np
import pytest
from abc_lab_shared.domain.entities import BoxExchange, BoxExchangeSpec, DiscreteMeasure
from abc_lab_shared.domain.enums import SurfaceKind
from abc_lab_shared.domain.models import RunConfig
from abc_lab_shared.geometry import to_surface

from src.processor.services.kicker_service import KickerService, ergodic_layout, ergodic_permutation
from src.processor.services.map_service import MapService
from src.processor.services.profile_cache_service import ProfileCacheService
from src.processor.services.separation_service import SeparationService
from src.processor.services.transport_service import TransportService


@pytest.fixture
def map_service():
    return MapService(fd_step=1e-5)


@pytest.fixture
def transport_service(map_service):
    return TransportService(map_service, support_cap=4096, threads=1)


@pytest.fixture
def profile_cache():
    return ProfileCacheService(max_entries=8)


@pytest.fixture
def separation_service(transport_service, profile_cache):
    return SeparationService(transport_service, profile_cache, y_grid=8, eta_grid=16, measure_support=16)


@pytest.fixture
def kicker_service(transport_service, separation_service):
    return KickerService(transport_service, separation_service, box_cap=2**14, y_grid=4, max_doublings=6)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def make_box_exchange():
    """Kicker ergódico pequeno (q, R) sem certificação, para testes de avaliação."""

    def factory(kind: SurfaceKind = SurfaceKind.ANNULUS, q: int = 2, rows: int = 4, margin: float = 0.1) -> BoxExchange:
        k, n_theta = ergodic_layout(q, rows)
        spec = BoxExchangeSpec(
            n_theta=n_theta,
            n_y=rows,
            perm=ergodic_permutation(q, rows, k),
            q_equivariance=q,
            y_margin=margin,
        )
        return BoxExchange(kind, spec)

    return factory


@pytest.fixture
def random_measure(rng):
    def factory(kind: SurfaceKind, size: int) -> DiscreteMeasure:
        theta = rng.random(size)
        y = rng.uniform(-0.95, 0.95, size)
        weights = rng.random(size) + 0.1
        return DiscreteMeasure(kind, to_surface(theta, y, kind), weights / weights.sum())

    return factory


@pytest.fixture
def make_config():
    def factory(**overrides) -> RunConfig:
        data = {
            "mode": "ergodic",
            "surface": "annulus",
            "stages": 1,
            "scheme": {"resolution_retries": 0, "alpha_retries": 0, "max_nu_halvings": 2},
            "output_dir": "runs/test",
        }
        data.update(overrides)
        return RunConfig.model_validate(data)

    return factory

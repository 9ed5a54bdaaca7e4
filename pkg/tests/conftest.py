import math
import warnings

import pytest
from hypothesis import HealthCheck, settings

from fresnel_qdf import fock, qdf

settings.register_profile(
    "default", max_examples=30, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

# wide cats: q1 = -q2 = 4, p1 = p2 = 0
CAT_AMP = 4.0 / math.sqrt(2.0)


@pytest.fixture(autouse=True)
def _quiet_edge_warnings():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", qdf.BoxEdgeWarning)
        warnings.simplefilter("ignore", fock.TruncationWarning)
        yield


@pytest.fixture
def vacuum():
    return fock.density_from_pure(fock.fock_state(0, 32))


def rho_of(psi):
    return fock.density_from_pure(psi)

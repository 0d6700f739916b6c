import random

import pytest
from hypothesis import HealthCheck, settings

from fltquad.quadfield import QuadField

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(params=[5, 17], ids=["d5", "d17"])
def F(request):
    return QuadField(request.param)


@pytest.fixture
def rng():
    return random.Random(20241016)


def rand_elt(F, rng, size=10**4):
    return F(rng.randint(-size, size), rng.randint(-size, size))

import os

import pytest
from hypothesis import HealthCheck, settings

from hardylab.geometry import Domain

settings.register_profile(
    "hardylab", deadline=None, derandomize=True, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "hardylab"))

CATALOG = {
    "interval": Domain.interval(0.0, 1.0),
    "disk": Domain.disk(1.0),
    "annulus": Domain.annulus(0.5, 1.0),
    "punctured_disk": Domain.punctured_disk(1.0),
}


@pytest.fixture(params=sorted(CATALOG))
def domain(request):
    return CATALOG[request.param]

import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from trisdp import dense_linalg

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile(
    "trisdp", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("trisdp")


@pytest.fixture(params=dense_linalg.available_backends())
def kernel_backend(request):
    """Run the test once per compiled/pure kernel backend."""
    with dense_linalg.use_backend(request.param):
        yield request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)

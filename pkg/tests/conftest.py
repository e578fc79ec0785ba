import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

from pauc import DiagnosticSample  # noqa: E402

settings.register_profile(
    "default",
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile("ci", max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def tie_free_sample(rng: np.random.Generator, alpha: int, beta: int, kappa: int, shift: float = 0.0) -> DiagnosticSample:
    """Continuous draws; ties have probability zero and are rejected if they occur."""
    while True:
        xi = rng.normal(size=(alpha, kappa))
        eta = rng.normal(loc=shift, size=(beta, kappa))
        pooled = np.vstack([xi, eta])
        if all(np.unique(pooled[:, i]).size == alpha + beta for i in range(kappa)):
            return DiagnosticSample.from_arrays(xi, eta)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def small_trial(rng):
    """Three markers, 12 non-diseased and 10 diseased subjects, tie-free."""
    return tie_free_sample(rng, 12, 10, 3, shift=0.6)


@pytest.fixture
def trial_100(rng):
    return tie_free_sample(rng, 100, 100, 3, shift=0.4)

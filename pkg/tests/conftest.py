import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from tvdual.objectives import ObjectiveSet, QuadraticLocalObjective

# fixed examples by default; HYPOTHESIS_PROFILE=explore draws fresh ones
settings.register_profile("default", max_examples=60, deadline=None, derandomize=True,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("explore", max_examples=300, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def scalar_nodes(centers):
    """Nodes f_i(x) = (x - a_i)^2 / 2 in one dimension."""
    return ObjectiveSet(QuadraticLocalObjective([[1.0]], [a], r=0.0, scale=1.0) for a in centers)


@pytest.fixture
def two_nodes():
    return scalar_nodes([0.0, 2.0])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_objectives(rng, n=5, p=3, d=5, r=0.1):
    return ObjectiveSet(
        QuadraticLocalObjective(rng.normal(size=(d, p)), rng.normal(size=d), r, 1.0 / (n * d))
        for _ in range(n))


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)

import random

import pytest
from hypothesis import HealthCheck, settings

from polygrpd import action_groupoid, cyclic, discrete, point
from polygrpd.io import Workspace, fixture_path

settings.register_profile("default", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def BC2():
    return cyclic(2)


@pytest.fixture
def EC2():
    G = cyclic(2)
    return action_groupoid(G, list(G.morphisms), G.comp_labels, name="EC2")


@pytest.fixture
def rng():
    return random.Random(2024)


@pytest.fixture
def ws():
    return Workspace()


@pytest.fixture
def fixture():
    return lambda name: str(fixture_path(name))


@pytest.fixture
def pt():
    return point()


@pytest.fixture
def d():
    return discrete

from __future__ import annotations

import os
import random

import pytest
from hypothesis import HealthCheck, settings

from hermhecke.field import FieldConfig

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=200, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

SEED = int(os.environ.get("HERMHECKE_SEED", "20240611"))


@pytest.fixture
def rng():
    return random.Random(SEED)


@pytest.fixture(scope="session")
def F3():
    return FieldConfig(q=3).local_field


@pytest.fixture(scope="session")
def F5():
    return FieldConfig(q=5).local_field

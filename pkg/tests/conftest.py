"""Shared fixtures: one default-mesh context and one laws-mesh context per
session, so sweep caches are reused across test modules. Hypothesis runs
derandomized so the suite is reproducible byte-for-byte."""

import pytest
from hypothesis import HealthCheck, settings

from farey import transfer

settings.register_profile(
    "suite",
    derandomize=True,
    max_examples=50,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def default_ctx():
    return transfer.get_default_context()


@pytest.fixture(scope="session")
def laws_ctx():
    return transfer.get_laws_context()

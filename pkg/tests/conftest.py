import os

import pytest
from hypothesis import HealthCheck
from hypothesis import settings

from s2c_compliance import load_fixture_catalog
from s2c_compliance import load_sample_catalog
from s2c_compliance import load_sample_external_inputs
from s2c_compliance.pipeline import load_attestations
from s2c_compliance.pipeline import parse_pipeline

FIXTURES_DIR = os.path.join(os.path.dirname(__file__), "fixtures")

settings.register_profile("default", deadline=None)
settings.register_profile(
    "ci",
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def fixture_path():
    def _path(name: str) -> str:
        return os.path.join(FIXTURES_DIR, name)

    return _path


@pytest.fixture(scope="session")
def sample_catalog():
    return load_sample_catalog()


@pytest.fixture(scope="session")
def sample_external_inputs():
    return load_sample_external_inputs()


@pytest.fixture(scope="session")
def fixture_catalog():
    return load_fixture_catalog()


@pytest.fixture(scope="session")
def demo_pipeline():
    return parse_pipeline(os.path.join(FIXTURES_DIR, "demo-pipeline.yaml"))


@pytest.fixture(scope="session")
def demo_attestations():
    return load_attestations(os.path.join(FIXTURES_DIR, "attestations.json"))

"""
Shared pytest configuration and fixtures.

Slow tests (full-size synthetic presets) are skipped unless pytest is
started with --runslow (run_tests.py --slow passes it).
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add parent directory to path
BASE_DIR = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(BASE_DIR))

from sparse_iscra.data.toy_instances import exam31, exam41
from sparse_iscra.models.problem import GroundTruth, ProblemInstance
from sparse_iscra.utils.config import reload_config

FIXTURES_DIR = Path(__file__).resolve().parent / "fixtures"


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run tests marked slow")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running synthetic test (needs --runslow)")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(autouse=True)
def fresh_config():
    """Every test starts and ends with an empty configuration cache."""
    reload_config()
    yield
    reload_config()


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES_DIR


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture
def exam41_pair():
    return exam41(0.05)


@pytest.fixture
def exam31_pair():
    return exam31()


@pytest.fixture
def small_instance():
    """20 x 40 Gaussian design with a 4-sparse truth and small noise."""
    generator = np.random.default_rng(7)
    A = generator.standard_normal((20, 40))
    x_bar = np.zeros(40)
    x_bar[[3, 11, 25, 38]] = [4.0, -3.0, 2.5, 5.0]
    noise = 0.01 * generator.standard_normal(20)
    instance = ProblemInstance(A, A @ x_bar + noise, name="small")
    return instance, GroundTruth(x_bar, noise)

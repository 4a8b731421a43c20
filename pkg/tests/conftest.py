"""
Shared fixtures: named instances, their reductions and reference codes
"""

from pathlib import Path

import pytest

from src.corpus import bottleneck, butterfly, butterfly_routing_code, butterfly_xor_code, single_edge
from src.reduction import lift_code, reduce

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture(name="data_dir")
def fixture_data_dir():
    return DATA_DIR


@pytest.fixture(autouse=True)
def fixture_settings_env(monkeypatch):
    """Keep tests independent of a developer's .env"""
    for name in (
        "NETREDUCE_LOG_LEVEL",
        "NETREDUCE_MAX_EVALUATIONS",
        "NETREDUCE_SEARCH_BUDGET",
        "NETREDUCE_SEARCH_SECONDS",
        "NETREDUCE_SEED",
        "NETREDUCE_JOBS",
    ):
        monkeypatch.delenv(name, raising=False)


@pytest.fixture(name="single")
def fixture_single():
    return single_edge()


@pytest.fixture(name="fly")
def fixture_fly():
    return butterfly()


@pytest.fixture(name="neck")
def fixture_neck():
    return bottleneck()


@pytest.fixture(name="fly_reduced")
def fixture_fly_reduced(fly):
    return reduce(fly)


@pytest.fixture(name="xor_code")
def fixture_xor_code():
    return butterfly_xor_code()


@pytest.fixture(name="routing_code")
def fixture_routing_code():
    return butterfly_routing_code()


@pytest.fixture(name="fly_lifted")
def fixture_fly_lifted(fly, fly_reduced, xor_code):
    return lift_code(xor_code, fly, fly_reduced).code

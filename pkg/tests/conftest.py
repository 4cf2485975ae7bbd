import time

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from torsionlab import kernels, witten

settings.register_profile("default", deadline=None, max_examples=30,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

BACKENDS = kernels.available_backends()


@pytest.fixture(params=sorted(BACKENDS))
def backend(request):
    return BACKENDS[request.param]


@pytest.fixture(scope="session")
def witten_circle():
    return witten.witten_circle(256)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


SESSION_START = time.perf_counter()
ACCEPTANCE_LINES = []


def pytest_collection_modifyitems(session, config, items):
    # acceptance runs last so its wall-clock criterion sees the whole suite
    items.sort(key=lambda it: (it.module.__name__.endswith("test_acceptance"),
                               it.get_closest_marker("suite_clock") is not None))


def pytest_configure(config):
    config.addinivalue_line("markers", "suite_clock: runs after everything else")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

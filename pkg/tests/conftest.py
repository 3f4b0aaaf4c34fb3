import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from snlslab.initial_data import DataSpec
from snlslab.spectral import SpectralGrid

settings.register_profile(
    "lab", max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("lab")

# criterion number -> (passed, detail); filled by tests/test_acceptance.py
CRITERIA: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def record_criterion():
    def record(number: int, passed: bool, detail: str = ""):
        CRITERIA[number] = (bool(passed), detail)
        print(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERIA):
        passed, detail = CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def small_grid():
    return SpectralGrid(8 * math.pi, 256)


@pytest.fixture(scope="session")
def lab_grid():
    return SpectralGrid(20 * math.pi, 1024)


@pytest.fixture(scope="session")
def default_grid():
    return SpectralGrid()


@pytest.fixture
def gaussian(lab_grid):
    return DataSpec("gaussian", 1.0).build(lab_grid)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

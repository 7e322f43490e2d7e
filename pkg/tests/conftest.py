import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from seedfolio.harness import data_path
from seedfolio.matrix_game import read_matrix_csv

settings.register_profile(
    "default",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

PENNIES = np.array([[1.0, 0.0], [0.0, 1.0]])
RPS = np.array([[0.5, 1.0, 0.0], [0.0, 0.5, 1.0], [1.0, 0.0, 0.5]])


@pytest.fixture(scope="session")
def builtin32():
    return read_matrix_csv(data_path("connect4_s300_32x32.csv"))


@pytest.fixture(scope="session")
def builtin16():
    return read_matrix_csv(data_path("connect4_s300_16x16.csv"))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)

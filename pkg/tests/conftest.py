import numpy as np
import pytest

from pointwave.bc_algebra import build_config
from pointwave.free_wave import BumpProfile, InitialData
from pointwave.wavefield import propagation_experiment, simulate

TWO_POINTS = [[0.0, 0.0, 0.0], [10.0, 0.0, 0.0]]
LOCAL_H = [[1, 0], [0, 1]]
NONLOCAL_H = [[0, 1], [1, 0]]


def random_invertible(rng, n):
    while True:
        M = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        if np.linalg.cond(M) < 1e3:
            return M


def random_hermitian(rng, n):
    X = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (X + X.conj().T) / 2


@pytest.fixture(scope="session")
def bump_data():
    return InitialData([BumpProfile((-2.0, 0.0, 0.0), 0.5, 1.0)])


@pytest.fixture(scope="session")
def local_config():
    return build_config(TWO_POINTS, np.eye(2), LOCAL_H)


@pytest.fixture(scope="session")
def nonlocal_config():
    return build_config(TWO_POINTS, np.eye(2), NONLOCAL_H)


@pytest.fixture(scope="session")
def local_sim(local_config, bump_data):
    return simulate(local_config, bump_data, 15.0, 0.01)


@pytest.fixture(scope="session")
def nonlocal_sim(nonlocal_config, bump_data):
    return simulate(nonlocal_config, bump_data, 15.0, 0.01)


@pytest.fixture(scope="session")
def local_report(local_config, bump_data, local_sim):
    return propagation_experiment(local_config, bump_data, 15.0, 0.01, name="local", sim=local_sim)


@pytest.fixture(scope="session")
def nonlocal_report(nonlocal_config, bump_data, nonlocal_sim):
    return propagation_experiment(nonlocal_config, bump_data, 15.0, 0.01, name="nonlocal",
                                  sim=nonlocal_sim)


ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])

import numpy as np
import pytest

from d2dcluster import RadioParams, generate_scenario, run_rforce


@pytest.fixture(scope="session")
def radio():
    return RadioParams()


@pytest.fixture(scope="session", autouse=True)
def _warm_jit():
    # compile the numba kernels once so individual tests time honestly
    sc = generate_scenario(12, seed=99)
    run_rforce(sc, seed=99)


@pytest.fixture
def small_scenario():
    return generate_scenario(20, n_aps=1, seed=7)


def assert_valid_solution(sol, scenario):
    assert sol.n_devices == scenario.n_devices
    for h in sol.heads:
        assert sol.head_of[h] == h
    for i, h in enumerate(sol.head_of):
        if h != -1:
            assert sol.head_of[h] == h


@pytest.fixture
def rng():
    return np.random.default_rng(1234)

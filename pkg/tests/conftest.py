import numpy as np
import pytest

from lpcritpath import ProblemInstance
from lpcritpath.strategies import greedy_path, main_path
from lpcritpath.verification import load_fixtures

G3 = [[1, -0.7, -0.6], [-0.7, 1, -0.1], [-0.6, -0.1, 1]]


@pytest.fixture(scope="session")
def fixtures():
    return load_fixtures()


@pytest.fixture(scope="session")
def ex1d(fixtures):
    return fixtures["ex1d"]


@pytest.fixture(scope="session")
def ex2(fixtures):
    return fixtures["ex2"]


@pytest.fixture(scope="session")
def ex2n(fixtures):
    return fixtures["ex2_nonorth"]


@pytest.fixture(scope="session")
def p07(fixtures):
    return fixtures["ex_p07"]


@pytest.fixture(scope="session")
def ex3d(fixtures):
    return fixtures["ex3d"]


@pytest.fixture(scope="session")
def ex5d(fixtures):
    return fixtures["ex5d"]


@pytest.fixture(scope="session")
def paths(fixtures):
    """Every strategy on every fixture, traced once per session."""
    out = {}
    for name, inst in fixtures.items():
        out[name, "main"] = main_path(inst)
        out[name, "greedy"] = greedy_path(inst, False)
        out[name, "greedy-modified"] = greedy_path(inst, True)
    return out


def scalar_instance(t, p):
    return ProblemInstance.from_gram([[1.0]], [t], p)


def identity_instance(beta_star, p):
    return ProblemInstance.from_gram(np.eye(len(beta_star)), beta_star, p)

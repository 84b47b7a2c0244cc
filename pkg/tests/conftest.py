import numpy as np
import pytest
from hypothesis import settings

from fracmorse import (Mesh1D, build_operators, solve_eigen, example_reaction,
                       EnergyModel)

settings.register_profile("default", max_examples=25, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def mesh64():
    return Mesh1D(-1.0, 1.0, 64, 0.5)


@pytest.fixture(scope="session")
def ops64(mesh64):
    return build_operators(mesh64)


@pytest.fixture(scope="session")
def eig64(ops64):
    return solve_eigen(ops64, 6)


@pytest.fixture(scope="session")
def mesh128():
    return Mesh1D(-1.0, 1.0, 128, 0.5)


@pytest.fixture(scope="session")
def ops128(mesh128):
    return build_operators(mesh128)


@pytest.fixture(scope="session")
def eig128(ops128):
    return solve_eigen(ops128, 6)


@pytest.fixture(scope="session")
def sublinear64(mesh64, ops64, eig64):
    """Slope 0.5 lambda_1 at zero, resonant with lambda_2 at infinity."""
    r = example_reaction(0.5 * eig64.lambdas[0], 2, eig64.lambdas)
    return EnergyModel(mesh64, r, A=ops64.A)


@pytest.fixture(scope="session")
def crossing64(mesh64, ops64, eig64):
    """Slope between lambda_1 and lambda_2 at zero, resonant with lambda_2 at infinity."""
    lam = eig64.lambdas
    r = example_reaction(0.5 * (lam[0] + lam[1]), 2, lam)
    return EnergyModel(mesh64, r, A=ops64.A)


@pytest.fixture(scope="session")
def sublinear128(mesh128, ops128, eig128):
    r = example_reaction(0.5 * eig128.lambdas[0], 2, eig128.lambdas)
    return EnergyModel(mesh128, r, A=ops128.A)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


_ACCEPTANCE = []


@pytest.fixture
def acceptance():
    """Record one pass/fail line for an acceptance criterion."""

    def record(number, title, passed, detail=""):
        line = f"criterion {number:>2} {'PASS' if passed else 'FAIL'}  {title}"
        if detail:
            line += f"  [{detail}]"
        _ACCEPTANCE.append((number, line))
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_ACCEPTANCE):
        terminalreporter.write_line(line)

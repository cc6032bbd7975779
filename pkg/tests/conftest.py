import numpy as np
import pytest

from qcstab import ChainParams, Deformation, MorsePotential, solve_F0


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def morse5():
    return MorsePotential(5.0)


@pytest.fixture(scope="session")
def F0_morse5(morse5):
    return solve_F0(morse5).value


@pytest.fixture
def small_chain():
    return ChainParams(8, 2)


def random_strains(rng, params, F, amplitude=0.05):
    e = rng.uniform(-1.0, 1.0, params.size)
    return F + amplitude * F * (e - e.mean())


def random_deformation(rng, params, F, amplitude=0.05):
    return Deformation.from_strains(params.with_strain(F), random_strains(rng, params, F, amplitude))


ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.write_sep("=", "acceptance criteria")
        for key in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[key])

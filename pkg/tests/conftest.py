import numpy as np
import pytest

from skewec import Normal, SecDensity, StudentT, SymmetricCdf, standard_bivariate
from skewec import config


def bivariate(rho, h, *, g0=SymmetricCdf.STANDARD_NORMAL, generator=None, standardized=False, name="t"):
    return SecDensity(standard_bivariate(rho, generator or Normal()), g0, h, standardized=standardized, name=name)


@pytest.fixture(scope="session")
def demos():
    return {ps.name: ps.to_density() for ps in config.demo_sets()}


@pytest.fixture(scope="session")
def cf():
    return {ps.name: ps.to_density() for ps in config.closed_form_sets()}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

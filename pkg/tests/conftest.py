import math

import numpy as np
import pytest
from scipy.stats import unitary_group

from poeprobe.circuits import paper_circuit, product_ket
from poeprobe.liouville import pure_state

# Closed forms for the demo cycle Y(2.4) XX(1.0) started in |00>:
# <00|U|00> = cos(0.5) cos(1.2), and the only decaying F eigenvalue is 1 - that squared.
DEMO_R1 = math.cos(0.5) ** 2 * math.cos(1.2) ** 2
DEMO_LAMBDA = 1.0 - DEMO_R1


def random_unitary(dim, rng):
    return unitary_group.rvs(dim, random_state=rng)


def random_pure(dim, rng):
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return pure_state(psi)


@pytest.fixture
def circuit():
    return paper_circuit()


@pytest.fixture
def rho00():
    return pure_state(product_ket("00"))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)

import numpy as np
import pytest

from artifact.cfrac import expand
from artifact.theta1 import Lattice, ThetaSeries
from artifact.thetap import MultiThetaSpace, WBasis

TAUS = (1j, 0.3 + 1.1j)
PAIRS = ((2, 1), (3, 1), (3, 2), (4, 3), (5, 2))

_BASES = {}


def wbasis(n, k, tau=1j):
    key = (n, k, complex(tau))
    if key not in _BASES:
        _BASES[key] = WBasis(MultiThetaSpace(expand(n, k), Lattice(tau)))
    return _BASES[key]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=TAUS, ids=["tau=i", "tau=0.3+1.1i"])
def series(request):
    return ThetaSeries(Lattice(request.param))


def cpoints(rng, shape, tau=1j, im=0.3):
    return rng.uniform(-0.5, 0.5, shape) + rng.uniform(-im, im, shape) * tau


def pytest_configure(config):
    config._acceptance_lines = []


@pytest.fixture
def acceptance_log(request):
    return request.config._acceptance_lines


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)

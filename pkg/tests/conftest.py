import sys

import numpy as np
import pytest

from stochcorr._backend import implementations
from stochcorr.linalg import CovarianceModel


@pytest.fixture(params=sorted(implementations()))
def kernels(request):
    """Each available kernel backend in turn."""
    return implementations()[request.param]


@pytest.fixture
def cov3():
    sigma = np.array([1.0, 2.0, 0.5])
    corr = np.array([[1.0, 0.3, 0.1], [0.3, 1.0, 0.4], [0.1, 0.4, 1.0]])
    return CovarianceModel.from_corr(sigma, corr)


def random_spd(rng, k, cond=50.0):
    q, _ = np.linalg.qr(rng.standard_normal((k, k)))
    lam = np.geomspace(1.0, cond, k)
    m = (q * lam) @ q.T
    return 0.5 * (m + m.T)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for line in results:
            terminalreporter.write_line(line)

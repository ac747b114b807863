import numpy as np
import pytest

from hjbgrowth import (Assumption6Params, ValueGrid, make_log_ak, make_rck_cobb_douglas,
                       solve_hjb)

LOG_AK = dict(gamma=0.1, rho=0.05)
RCK = dict(alpha=0.3, d=0.05, rho=0.05)
RCK_NODES = 1600


@pytest.fixture(scope="session")
def log_ak():
    return make_log_ak(LOG_AK["gamma"], LOG_AK["rho"])


@pytest.fixture(scope="session")
def log_ak_a6():
    return Assumption6Params(k_star=1.0, k_plus=1.0, c_star=0.0, gamma=0.1, delta=1.0,
                             theta=1.0, a=1.0, b=0.0, cc=0.0)


@pytest.fixture(scope="session")
def log_ak_solved(log_ak):
    return solve_hjb(log_ak, ValueGrid.template(0.1, 10.0, 400))


@pytest.fixture(scope="session")
def rck():
    return make_rck_cobb_douglas(RCK["alpha"], RCK["d"], RCK["rho"])


@pytest.fixture(scope="session")
def rck_a6():
    # supporting hyperplane of k^0.3 - 0.05 k - c at (k*, c*) = (1, 0)
    return Assumption6Params(k_star=1.0, k_plus=1.0, c_star=0.0, gamma=0.25, delta=1.0,
                             theta=1.0, a=1.0, b=0.0, cc=0.0)


@pytest.fixture(scope="session")
def rck_solved(rck):
    return solve_hjb(rck, ValueGrid.template(0.2, 10.0, RCK_NODES))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# one line per acceptance criterion, printed after the run
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if passed else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def acceptance():
    return ACCEPTANCE

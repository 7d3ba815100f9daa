import pytest

from queuewait import make_params


@pytest.fixture
def md1():
    """lambda = 2, mu = 3 with deterministic service (rho = 2/3, a = 1/3)."""
    return make_params(2.0, 3.0, "det")


@pytest.fixture
def mm1():
    return make_params(2.0, 3.0, "exp")

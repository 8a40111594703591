import pytest

from qobf.fixtures import bernstein_vazirani, period_toy, qaoa_ring, standard_fixtures


@pytest.fixture
def bv6():
    return bernstein_vazirani("101101")


@pytest.fixture
def qaoa4():
    return qaoa_ring(4)


@pytest.fixture
def period7():
    return period_toy()


@pytest.fixture
def fixtures():
    return standard_fixtures()

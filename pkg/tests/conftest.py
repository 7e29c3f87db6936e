import pytest

from entwit import build_ks_channel, bundled_basis_set, confusability_graph


@pytest.fixture(scope="session")
def bundled():
    return bundled_basis_set()


@pytest.fixture(scope="session")
def channel(bundled):
    return build_ks_channel(bundled)


@pytest.fixture(scope="session")
def graph(channel):
    return confusability_graph(channel)

import pytest

from satcov.geometry import SystemParams, cluster_geometry


@pytest.fixture(scope="session")
def scen1():
    p = SystemParams.from_mean_visible(50.0)
    return p, cluster_geometry(p)


@pytest.fixture(scope="session")
def scen2():
    p = SystemParams.from_mean_visible(300.0)
    return p, cluster_geometry(p)

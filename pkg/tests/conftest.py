import pytest

from sqlclarify import instance_distribution, load_bundled


@pytest.fixture(scope="session")
def fig3_instance():
    return load_bundled("fig3.json")[0]


@pytest.fixture()
def fig3_dist(fig3_instance):
    return instance_distribution(fig3_instance)


@pytest.fixture(scope="session")
def corpus():
    return load_bundled("corpus.json")


@pytest.fixture(scope="session")
def boundary():
    return load_bundled("boundary.json")

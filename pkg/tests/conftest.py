import pytest

from sparc import load_dataset, make_synthetic_dataset
from sparc.pipeline import clear_image_caches


@pytest.fixture(scope="session")
def dataset500_path(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth500")
    return make_synthetic_dataset(str(out), 500, seed=11)


@pytest.fixture(scope="session")
def dataset500(dataset500_path):
    return load_dataset(dataset500_path)


@pytest.fixture(scope="session")
def dataset200(dataset500):
    return dataset500[:200]


@pytest.fixture(scope="session")
def dataset100(dataset500):
    return dataset500[:100]


@pytest.fixture(scope="session")
def dataset20(dataset500):
    return dataset500[:20]


@pytest.fixture(scope="session", autouse=True)
def _drop_image_caches_at_end():
    yield
    clear_image_caches()

import pytest

from duetto import load_fixture


@pytest.fixture(scope="session")
def countryside():
    return load_fixture("countryside")

import pytest

from kaonbell import default_params


@pytest.fixture(scope="session")
def defaults():
    return default_params()

import pytest

from suite import tiny


@pytest.fixture
def tiny_space():
    return tiny()

import numpy as np
import pytest

from sandpile import identity, rectangle


@pytest.fixture(scope="session")
def d12():
    return rectangle(2, 1)


@pytest.fixture(scope="session")
def d15():
    return rectangle(15, 15)


@pytest.fixture(scope="session")
def d31():
    return rectangle(31, 31)


@pytest.fixture(scope="session")
def d63():
    return rectangle(63, 63)


@pytest.fixture(scope="session")
def ident63(d63):
    return identity(d63)


@pytest.fixture(scope="session")
def d255():
    return rectangle(255, 255)


@pytest.fixture(scope="session")
def ident255(d255):
    return identity(d255)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240811)

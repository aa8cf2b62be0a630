import pytest

from schursigma.harness import selftest


@pytest.fixture(scope="session")
def class2_report():
    return selftest.class2_report()


@pytest.fixture(scope="session")
def class2_groups():
    return selftest.class2_groups()


@pytest.fixture(scope="session")
def shallow_tree():
    """Schur sigma-tree at (3, 2) to class 4, expanding nodes of order <= 3^5."""
    return selftest.shallow_tree()

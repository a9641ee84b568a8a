import pytest

from loewnerkit.spiral import CompactSet, spiral_driving


@pytest.fixture(scope="session")
def disk():
    return CompactSet.disk(2j, 0.5)


@pytest.fixture(scope="session")
def spiral_lam(disk):
    """Normalized spiral driving term around the disk, cut at capacity 1 - 2**-16."""
    return spiral_driving(disk, 1.0 - 2.0 ** -16, 8000)

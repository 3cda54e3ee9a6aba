import numpy as np
import pytest

from fdmaps import build_disk_mesh, build_rect_mesh


@pytest.fixture(scope="session")
def disk3():
    return build_disk_mesh(3)


@pytest.fixture(scope="session")
def disk4():
    return build_disk_mesh(4)


@pytest.fixture(scope="session")
def disk5():
    return build_disk_mesh(5)


@pytest.fixture(scope="session")
def unit_square_16():
    return build_rect_mesh(16, 16, 0.0, 1.0 + 1.0j)


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)

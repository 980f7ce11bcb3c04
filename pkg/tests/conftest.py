import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_disk_points(rng, n, radius):
    r = radius * np.sqrt(rng.uniform(size=n))
    return r * np.exp(2j * np.pi * rng.uniform(size=n))


def wirtinger_fd(func, z, h=1e-5):
    """Central-difference d = (d_x - i d_y)/2."""
    fx = (func(z + h) - func(z - h)) / (2 * h)
    fy = (func(z + 1j * h) - func(z - 1j * h)) / (2 * h)
    return 0.5 * (fx - 1j * fy)


def laplacian_fd(func, z, h=1e-3):
    """Central-difference (1/4)(d_xx + d_yy)."""
    c = func(z)
    return 0.25 * (func(z + h) + func(z - h) + func(z + 1j * h) + func(z - 1j * h) - 4 * c) / h**2


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

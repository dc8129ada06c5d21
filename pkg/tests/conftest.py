import numpy as np
import pytest

from ridgelab.wavelets import morse


@pytest.fixture(scope="session")
def w80():
    """Default analysis wavelet: Morse(9, 3) peaking at 80 Hz with unit peak."""
    return morse(9, 3, 80.0, "peak")


@pytest.fixture(scope="session")
def w11():
    return morse(1, 1)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)

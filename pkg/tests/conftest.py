import numpy as np
import pytest

from vrthick.metric import EUCLIDEAN, PointCloud, build_space


def line_space(*xs):
    return build_space(PointCloud(np.array(xs, dtype=float).reshape(-1, 1), EUCLIDEAN))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import LINES
    except ImportError:
        return
    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)

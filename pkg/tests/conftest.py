import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def clamp1():
    from wdro.payoffs import clamp

    return clamp()


@pytest.fixture
def fine_grid():
    """[-2, 2] with step 0.01."""
    return np.round(np.linspace(-2.0, 2.0, 401), 12)


def pytest_terminal_summary(terminalreporter):
    from acceptance_report import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from bird.dictionary import MDCTDictionary  # noqa: E402


@pytest.fixture(scope="session")
def small_dict():
    return MDCTDictionary(scales=(8, 16, 32), n=128, shift_granularity=4)


@pytest.fixture(scope="session")
def dict_1024():
    return MDCTDictionary(n=1024)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)

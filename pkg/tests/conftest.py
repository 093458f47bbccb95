from pathlib import Path

import numpy as np
import pytest

from rsura.codebook import generate
from rsura.ldpc import default_code, read_alist

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def code():
    return default_code()


@pytest.fixture(scope="session")
def hamming():
    return read_alist(DATA / "hamming74.alist")


@pytest.fixture(scope="session")
def hamming_full():
    """Same (7,4) code with all seven nonzero checks; free of the 3-row graph's BP miscorrections."""
    return read_alist(DATA / "hamming74_full.alist")


@pytest.fixture(scope="session")
def full_codebook():
    return generate(114, 4096, seed=0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

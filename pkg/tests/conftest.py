import numpy as np
import pytest

from ids_lab.lattice import FundamentalCell
from ids_lab.model import Model

_REPORT = []


def record(criterion, passed, detail):
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {criterion}: {detail}"
    _REPORT.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if _REPORT:
        terminalreporter.section("acceptance criteria")
        for line in _REPORT:
            terminalreporter.write_line(line)


@pytest.fixture
def line_cell():
    return FundamentalCell.lattice(1)


@pytest.fixture
def free1():
    return Model.free(1)


@pytest.fixture
def anderson1():
    return Model.anderson(1)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

import numpy as np
import pytest

from dismet.core import FactorTable
from dismet.synthgen import factor_grid, grid_spec


def replicated_grid(cards, replication=1) -> FactorTable:
    f = factor_grid(grid_spec(cards))
    return f.take(np.tile(np.arange(f.n), replication))


@pytest.fixture
def grid22():
    return factor_grid(grid_spec((2, 2)))


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

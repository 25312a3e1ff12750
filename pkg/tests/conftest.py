import pytest

from citecore.dataset_io import load_table1
from citecore.estimated import JournalRecord

_ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def table1():
    return load_table1()


@pytest.fixture(scope="session")
def table1_mv(table1):
    """Table 1 records carrying only (m, v); log moments are derived."""
    return [JournalRecord(j.id, j.name, j.n_papers, j.arith) for j in table1]


@pytest.fixture
def acceptance_log():
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

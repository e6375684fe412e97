import pytest

from kzq.model import MomentumGrid

_ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def grid4096():
    return MomentumGrid(4096)


@pytest.fixture(scope="session")
def grid1024():
    return MomentumGrid(1024)


@pytest.fixture
def acceptance_report():
    """Record one summary line per acceptance criterion."""
    return _ACCEPTANCE_LINES.append


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

import pytest

from rabispec import two_mode, two_photon


@pytest.fixture
def tp():
    """Reference two-photon parameters (even sector, + branch)."""
    return two_photon(omega=1.0, delta=0.2, g=0.3, lam=0.25)


@pytest.fixture
def tm():
    """Reference two-mode parameters (n0 = 0)."""
    return two_mode(omega=1.0, delta=0.2, g=0.5, lam=0.5, n0=0)


_ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_log():
    """Collects the one-line verdict of each acceptance criterion."""
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

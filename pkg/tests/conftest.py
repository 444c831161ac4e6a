import numpy as np
import pytest

from smallsphere.tensor import ElectricMagneticParts, weyl_from_electric_magnetic

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def electric():
    """The worked example D = diag(2, -1, -1), E = 0."""
    return weyl_from_electric_magnetic(ElectricMagneticParts(np.diag([2.0, -1.0, -1.0]), np.zeros((3, 3))))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

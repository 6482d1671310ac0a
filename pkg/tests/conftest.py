import mpmath
import pytest

from bennett_bounds.bounds import BoundedRange

mpmath.mp.dps = 50


def mp_gamma(x):
    """High-precision reference for x - (1 + x) ln(1 + x)."""
    x = mpmath.mpf(x)
    return x - (1 + x) * mpmath.log1p(x)


@pytest.fixture
def unit():
    return BoundedRange(0.0, 1.0)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])

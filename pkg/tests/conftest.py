import numpy as np
import pytest

SEED = 2024


@pytest.fixture
def seed():
    return SEED


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def within(est, expected, z=3.0):
    """Real mean of a CorrelationEstimate within ``z`` standard errors."""
    return abs(est.mean.real - expected) <= z * est.stderr_real


_ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record one pass/fail line per acceptance criterion."""

    def _record(criterion, passed, detail):
        _ACCEPTANCE_LINES.append(f"{'PASS' if passed else 'FAIL'} criterion {criterion}: {detail}")
        return passed

    return _record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

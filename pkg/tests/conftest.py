import numpy as np
import pytest

from qrng_homodyne.toeplitz import AVAILABLE

_ACCEPTANCE_LINES = []


@pytest.fixture(params=AVAILABLE)
def backend(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20241202)


@pytest.fixture
def criterion():
    """Record one acceptance line; the terminal summary prints them all."""

    def record(label, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] {label}" + (f": {detail}" if detail else "")
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

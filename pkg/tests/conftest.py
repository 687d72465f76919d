import contextlib

import numpy as np
import pytest

_acceptance_lines = []


@pytest.fixture
def rng():
    return np.random.default_rng(0xC0DE)


@contextlib.contextmanager
def acceptance_check(num, name):
    """Record one PASS/FAIL line per acceptance check for the run summary."""
    status = "FAIL"
    try:
        yield
        status = "PASS"
    finally:
        _acceptance_lines.append(f"acceptance {num} ({name}): {status}")


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance checks")
        for line in sorted(_acceptance_lines):
            terminalreporter.write_line(line)

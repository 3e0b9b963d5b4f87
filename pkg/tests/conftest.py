import numpy as np
import pytest

from gchlab.core import Grid

# criterion number -> (passed, detail), filled by test_acceptance.py
ACCEPTANCE = {}


def record(criterion, passed, detail):
    ACCEPTANCE[criterion] = (bool(passed), detail)
    line = f"criterion {criterion:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[crit]
        terminalreporter.write_line(f"criterion {crit:2d}: {'PASS' if passed else 'FAIL'}  {detail}")


@pytest.fixture
def grid256():
    return Grid(20.0, 256)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

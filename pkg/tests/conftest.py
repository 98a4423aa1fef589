"""Shared test helpers.

The acceptance tests register one line per criterion through
record_criterion(); the summary hook prints them at the end of the run so
the verdicts are visible even when scrolling past the dots.
"""

import numpy as np
import pytest

_CRITERIA = {}


def record_criterion(num, passed, detail=""):
    _CRITERIA[num] = (bool(passed), detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        passed, detail = _CRITERIA[num]
        verdict = "PASS" if passed else "FAIL"
        line = f"criterion {num}: {verdict}"
        if detail:
            line += f" ({detail})"
        terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)

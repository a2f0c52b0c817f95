from dataclasses import replace

import pytest

from streamcount import dataset
from streamcount.predictor import PUBLISHED_BUNDLE

# One line per acceptance criterion, printed at the end of the run.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def published():
    return PUBLISHED_BUNDLE


@pytest.fixture
def measured_fp64_bundle():
    """Published coefficients with a retuned small-size overhead term.

    Chosen so the recommendation equals the *measured* optimum at every
    reference size (including 8e4 -> 1, 1e5 -> 1 and 5e5 -> 8).
    """
    return replace(PUBLISHED_BUNDLE, small_b=0.5, small_c=0.025)


@pytest.fixture
def t2_stage():
    return dataset.table2_stage_timings()

from datetime import datetime, timedelta, timezone
from importlib import resources
from pathlib import Path

import pytest
from hypothesis import settings

from sentopic.corpus import CleanDoc

# first calls pay for imports and JIT compilation
settings.register_profile("sentopic", deadline=None)
settings.load_profile("sentopic")

DATA = Path(str(resources.files("sentopic.data")))
T0 = datetime(2020, 11, 1, tzinfo=timezone.utc)


def make_doc(tokens, doc_id="d", author="a", hours=0):
    if isinstance(tokens, str):
        tokens = tokens.split()
    return CleanDoc(doc_id, tuple(tokens), T0 + timedelta(hours=hours), author)


@pytest.fixture
def data_dir():
    return DATA


@pytest.fixture
def golden_dir():
    return DATA / "golden"


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])

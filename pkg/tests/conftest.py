import numpy as np
import pytest

_RESULTS = {}


def record(criterion, passed, detail):
    """Store one acceptance outcome for the end-of-run summary."""
    _RESULTS[criterion] = (bool(passed), detail)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for c in sorted(_RESULTS):
        ok, detail = _RESULTS[c]
        terminalreporter.write_line(f"criterion {c:>2}: {'PASS' if ok else 'FAIL'}  {detail}")

import pytest

_RESULTS = []


@pytest.fixture
def record():
    """Collect ``(label, passed, detail)`` for the acceptance summary."""
    def _record(label, passed, detail):
        _RESULTS.append((label, bool(passed), detail))
        return passed
    return _record


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for label, passed, detail in _RESULTS:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {label}: {detail}")

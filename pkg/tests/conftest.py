import pytest

_ACCEPTANCE: dict = {}


@pytest.fixture
def acceptance_log():
    """Mapping criterion number -> (passed, detail), printed at the end of the session."""
    return _ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_ACCEPTANCE):
        passed, detail = _ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if passed else 'FAIL'}  {detail}")

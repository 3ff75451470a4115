import pytest

_LINES = []


@pytest.fixture
def report():
    """Record a one-line verdict that is echoed in the terminal summary."""

    def _report(criterion: int, ok: bool, detail: str) -> bool:
        line = f"criterion {criterion:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        _LINES.append(line)
        print(line)
        return ok

    return _report


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

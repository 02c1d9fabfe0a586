import pytest

_ACCEPTANCE: list[str] = []


@pytest.fixture
def record():
    """Log one acceptance line; the lines are repeated in the terminal summary."""
    def _record(cid: str, ok: bool, detail: str) -> bool:
        _ACCEPTANCE.append(f"[{'PASS' if ok else 'FAIL'}] {cid}: {detail}")
        return ok
    return _record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)

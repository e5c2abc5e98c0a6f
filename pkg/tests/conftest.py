import pytest

CRITERIA: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def criterion():
    """``criterion(id, ok, detail)`` records the outcome and fails the test when not ok."""
    def record(cid: str, ok: bool, detail: str):
        CRITERIA[cid] = (bool(ok), detail)
        assert ok, f"{cid}: {detail}"
    return record


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(CRITERIA, key=lambda c: int(c[1:])):
        ok, detail = CRITERIA[cid]
        terminalreporter.write_line(f"{cid:>4} {'PASS' if ok else 'FAIL'}  {detail}")

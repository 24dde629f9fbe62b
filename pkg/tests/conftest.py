import pytest

_ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.fixture
def criterion():
    """Record one acceptance line; the test still asserts on its own."""

    def record(name: str, ok: bool, detail: str = "") -> bool:
        _ACCEPTANCE.append((name, bool(ok), detail))
        print(f"[{'PASS' if ok else 'FAIL'}] {name} {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {name}  {detail}")

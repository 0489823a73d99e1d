import pytest

# (criterion number, title, passed, detail) recorded by the acceptance tests
RESULTS: list[tuple[int, str, bool, str]] = []


@pytest.fixture
def record():
    def _record(num: int, title: str, passed: bool, detail: str) -> None:
        RESULTS.append((num, title, bool(passed), detail))
    return _record


def pytest_terminal_summary(terminalreporter):
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num, title, passed, detail in sorted(RESULTS):
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {num}. {title}: {detail}")

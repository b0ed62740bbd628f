import pytest

# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def report():
    def record(number: int, title: str, passed: bool, detail: str):
        status = "PASS" if passed else "FAIL"
        ACCEPTANCE_LINES[number] = f"[{status}] criterion {number}: {title} ({detail})"
        print(ACCEPTANCE_LINES[number])
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])

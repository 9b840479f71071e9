import pytest

ACCEPTANCE_LINES: dict[int, str] = {}


def record(number: int, name: str, passed: bool, detail: str, seconds: float) -> str:
    line = f"criterion {number:2d} {name:<26} {'PASS' if passed else 'FAIL'}  {detail} [{seconds:.2f}s]"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return line


@pytest.fixture
def acceptance_record():
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])

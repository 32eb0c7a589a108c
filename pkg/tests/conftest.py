import pytest

ACCEPTANCE: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def record():
    """Record one acceptance line: ``record(label, passed, detail)``."""
    def _record(label: str, passed: bool, detail: str = ""):
        ACCEPTANCE[label] = (bool(passed), detail)
        return passed
    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    def order(label):
        head = label.split()[0]
        return (0, int(head[2:])) if head[:2] == "AC" and head[2:].isdigit() else (1, 0)

    for label in sorted(ACCEPTANCE, key=order):
        passed, detail = ACCEPTANCE[label]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {label}  {detail}")

import pytest

# (number, title, passed, detail) tuples filled in by test_acceptance.py
ACCEPTANCE = []


@pytest.fixture
def record_acceptance():
    def record(number, title, passed, detail=""):
        ACCEPTANCE.append((number, title, passed, detail))
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(ACCEPTANCE):
        verdict = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{verdict}] {number}. {title}: {detail}")

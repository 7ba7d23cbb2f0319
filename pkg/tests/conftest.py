import pytest

# criterion number -> (passed, detail); filled by test_acceptance
ACCEPTANCE_RESULTS: dict = {}


@pytest.fixture
def acceptance_results():
    return ACCEPTANCE_RESULTS


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[key]
        terminalreporter.write_line(f"criterion {key:>2}: {'PASS' if ok else 'FAIL'}  {detail}")

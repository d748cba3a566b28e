import sys


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Echo the acceptance-criterion pass/fail lines after the test run."""
    mod = sys.modules.get("test_acceptance") or sys.modules.get(
        "tests.test_acceptance"
    )
    lines = getattr(mod, "CRITERION_LINES", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(lines):
        terminalreporter.write_line(line)

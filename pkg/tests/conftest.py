import pytest

# criterion number -> (passed, detail), filled by test_acceptance
VERDICTS = {}


def record(number, title, passed, detail=""):
    VERDICTS[number] = (title, bool(passed), detail)
    print(f"{'PASS' if passed else 'FAIL'} criterion {number}: {title} {detail}".rstrip())


@pytest.hookimpl(trylast=True)
def pytest_terminal_summary(terminalreporter):
    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(VERDICTS):
        title, passed, detail = VERDICTS[number]
        terminalreporter.write_line(
            f"{'PASS' if passed else 'FAIL'} criterion {number}: {title} {detail}".rstrip())

import pytest

_CRITERIA: dict[int, tuple[str, str]] = {}


@pytest.fixture
def criterion(request):
    """Record one pass/fail line for an acceptance criterion.

    Usage: ``criterion(n, "description")`` at the start of the test; the
    outcome is taken from the test result.
    """
    def mark(n, text):
        request.node.criterion = (n, text)
    return mark


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    crit = getattr(item, "criterion", None)
    if crit is None:
        return
    n, text = crit
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        status = "PASS" if rep.passed else "FAIL"
        prev = _CRITERIA.get(n)
        if prev is None or prev[0] == "PASS":
            _CRITERIA[n] = (status, text)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        status, text = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:2d}: {status}  {text}")

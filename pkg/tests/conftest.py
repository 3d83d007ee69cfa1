import re

import pytest

_RESULTS = {}
_DETAILS = {}
_TITLES = {}


@pytest.fixture
def report(request):
    """Record a one-line measurement summary for an acceptance criterion."""
    def _report(text):
        _DETAILS[request.node.nodeid] = text
        print(text)
    return _report


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)", report.nodeid)
    if not m:
        return
    num = int(m.group(1))
    _TITLES[num] = (m.group(2).replace("_", " "), report.nodeid)
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _RESULTS[num] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_RESULTS):
        title, nodeid = _TITLES[num]
        status = {"passed": "PASS", "failed": "FAIL"}.get(_RESULTS[num], _RESULTS[num].upper())
        line = f"criterion {num:2d} {status}: {title}"
        if nodeid in _DETAILS:
            line += f" | {_DETAILS[nodeid]}"
        terminalreporter.write_line(line)

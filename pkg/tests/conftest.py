"""Collect outcomes of tests marked ``acceptance(n, title)`` and print one
summary line per criterion at the end of the run."""

import pytest

_RESULTS = {}


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("acceptance")
    if marker is None or not marker.args:
        return
    if call.when != "call" and call.excinfo is None:
        return
    number, title = marker.args[:2]
    entry = _RESULTS.setdefault(number, dict(title=title, passed=True, details=[]))
    if call.excinfo is not None and not call.excinfo.errisinstance(pytest.skip.Exception):
        entry["passed"] = False
    if call.when == "call":
        entry["details"].extend(v for k, v in item.user_properties if k == "detail")


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        entry = _RESULTS[number]
        status = "PASS" if entry["passed"] else "FAIL"
        detail = "; ".join(entry["details"])
        terminalreporter.write_line(f"[{status}] {number:>2}. {entry['title']}: {detail}")

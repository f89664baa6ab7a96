"""Shared pytest configuration: per-criterion reporting for the acceptance suite."""

from collections import OrderedDict

import pytest

_RESULTS = OrderedDict()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(key, title): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when not in ("setup", "call"):
        return
    if report.when == "setup" and report.passed:
        return
    key, title = marker.args
    entry = _RESULTS.setdefault(key, {"title": title, "passed": True, "details": []})
    entry["passed"] &= report.passed
    details = [v for k, v in item.user_properties if k == "detail"]
    entry["details"].extend(details if report.passed else details + [f"FAILED {item.name}"])


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key, entry in _RESULTS.items():
        status = "PASS" if entry["passed"] else "FAIL"
        detail = "; ".join(entry["details"])
        terminalreporter.write_line(f"{key} {status}  {entry['title']}" + (f"  [{detail}]" if detail else ""))

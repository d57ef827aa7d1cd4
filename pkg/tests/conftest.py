"""Collects acceptance outcomes and prints one PASS/FAIL line per criterion."""

import pytest

_outcomes: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by a test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    entry = _outcomes.setdefault(number, {"title": title, "ok": True, "notes": []})
    if report.when == "call" or report.failed or report.skipped:
        if hasattr(report, "wasxfail") or report.failed or report.skipped:
            entry["ok"] = False
            entry["notes"].append(f"{item.name}: {'expected failure' if hasattr(report, 'wasxfail') else report.outcome}")


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_outcomes):
        entry = _outcomes[number]
        line = f"criterion {number:2d} {'PASS' if entry['ok'] else 'FAIL'}  {entry['title']}"
        terminalreporter.write_line(line)
        for note in entry["notes"]:
            terminalreporter.write_line(f"              {note}")

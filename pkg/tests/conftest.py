"""Collects one PASS/FAIL line per acceptance criterion and prints them after the run."""

import pytest

_RESULTS: dict[int, dict] = {}
_ITEMS: dict[str, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


def _entry(item):
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return None
    number, title = marker.args
    return _RESULTS.setdefault(number, {"title": title, "outcomes": [], "details": []})


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    entry = _ITEMS.get(report.nodeid)
    if entry is None:
        return
    entry["outcomes"].append(report.outcome)
    for key, value in report.user_properties:
        if key == "detail":
            entry["details"].append(value)


def pytest_collection_modifyitems(items):
    for item in items:
        entry = _entry(item)
        if entry is not None:
            _ITEMS[item.nodeid] = entry


@pytest.fixture
def detail(record_property):
    """Attach a one-line summary to the criterion's report line."""
    def add(text: str) -> None:
        print(text)
        record_property("detail", text)
    return add


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        entry = _RESULTS[number]
        outcomes = entry["outcomes"]
        if not outcomes:
            verdict = "NOT RUN"
        elif all(o == "passed" for o in outcomes):
            verdict = "PASS"
        elif any(o == "failed" for o in outcomes):
            verdict = "FAIL"
        else:
            verdict = "SKIPPED"
        line = f"criterion {number} [{verdict}] {entry['title']}"
        if entry["details"]:
            line += " :: " + "; ".join(entry["details"])
        terminalreporter.write_line(line)

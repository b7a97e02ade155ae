"""Per-criterion pass/fail reporting for tests marked ``acceptance``.

Mark a test with ``@pytest.mark.acceptance(<number>, "<title>")``.  A
criterion passes when every test carrying its number ran and passed; the
summary prints one line per criterion with the summed setup and call time.
Tests can attach measured values through the ``criterion_detail`` fixture.
"""

import pytest

_RESULTS = {}


def _entry(item):
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return None
    number, title = marker.args[0], marker.args[1]
    return _RESULTS.setdefault(
        number, {"title": title, "failed": False, "ran": False, "skipped": False, "seconds": 0.0, "details": []}
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    entry = _entry(item)
    if entry is None:
        return
    entry["seconds"] += report.duration
    if report.when == "call" and report.passed:
        entry["ran"] = True
    if report.failed:
        entry["failed"] = True
    if report.skipped:
        entry["skipped"] = True


@pytest.fixture
def criterion_detail(request):
    entry = _entry(request.node)

    def add(text):
        entry["details"].append(str(text))

    return add


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        e = _RESULTS[number]
        if e["failed"]:
            status = "FAIL"
        elif e["ran"]:
            status = "PASS"
        else:
            status = "SKIP"
        line = f"criterion {number:>2}: {status}  {e['title']}  ({e['seconds']:.1f}s)"
        if e["details"]:
            line += "  [" + "; ".join(e["details"]) + "]"
        terminalreporter.write_line(line)

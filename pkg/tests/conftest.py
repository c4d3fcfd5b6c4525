import pytest

_results = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): exit criterion, reported in the summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        detail = dict(item.user_properties).get("detail", "")
        _results.append((marker.args[0], marker.args[1], report.outcome, report.duration, detail))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, outcome, duration, detail in sorted(_results):
        status = "PASS" if outcome == "passed" else "FAIL"
        line = f"[{status}] {number}. {title} ({duration:.1f}s)"
        if detail:
            line += f" :: {detail}"
        terminalreporter.write_line(line)

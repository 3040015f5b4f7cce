import pytest

_results: dict[str, list[tuple[str, float]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(label): acceptance criterion reported in the summary")
    config.addinivalue_line("markers", "slow: takes several seconds")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _results.setdefault(marker.args[0], []).append((report.outcome, report.duration))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for label, runs in sorted(_results.items()):
        ok = all(o == "passed" for o, _ in runs)
        elapsed = sum(d for _, d in runs)
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {label} ({elapsed:.2f}s)")

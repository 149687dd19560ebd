import pytest

_ACCEPTANCE = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        number, title = marker.args
        _ACCEPTANCE.append((number, title, "PASS" if rep.passed else "FAIL", rep.duration))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, status, duration in sorted(_ACCEPTANCE):
        terminalreporter.write_line(f"[{status}] criterion {number}: {title} ({duration:.2f}s)")

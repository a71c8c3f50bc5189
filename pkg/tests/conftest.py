import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile("ci", deadline=None, max_examples=200)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

_ACCEPTANCE = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title, limit): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        number, title, limit = mark.args
        elapsed = getattr(item, "_elapsed", None)
        _ACCEPTANCE.append((number, title, limit, rep.passed, elapsed))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, limit, ok, elapsed in sorted(_ACCEPTANCE):
        t = f"{elapsed:.2f}s" if elapsed is not None else "n/a"
        terminalreporter.write_line(
            f"{'PASS' if ok else 'FAIL'} criterion {number}: {title} [{t} / limit {limit}s]"
        )

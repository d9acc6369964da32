from __future__ import annotations

import pytest

from asymcc.model import SystemConfig

_CRITERIA: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion this test certifies")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call" and not rep.failed:
        return
    n, title = mark.args
    entry = _CRITERIA.setdefault(n, {"title": title, "ok": True, "detail": []})
    if rep.failed:
        entry["ok"] = False
        entry["detail"].append(item.name)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        e = _CRITERIA[n]
        status = "PASS" if e["ok"] else "FAIL"
        extra = "" if e["ok"] else f"  (failed: {', '.join(e['detail'])})"
        terminalreporter.write_line(f"[{status}] criterion {n}: {e['title']}{extra}")


@pytest.fixture
def example1() -> SystemConfig:
    return SystemConfig.build(4, "0.2", [(5, 2), (5, 4)])


@pytest.fixture
def table1a() -> SystemConfig:
    return SystemConfig.build(12, "0.04", [(25, 2), (75, 4)])

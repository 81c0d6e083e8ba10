import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): numbered acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None or rep.when != "call" and not (rep.when == "setup" and rep.failed):
        return
    number, title = mark.args
    detail = dict(item.user_properties).get("measured", "")
    _ACCEPTANCE[number] = ("PASS" if rep.passed else "FAIL", title, detail, rep.duration)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        status, title, detail, secs = _ACCEPTANCE[number]
        line = f"criterion {number}: {status}  {title}  [{secs:.1f}s]"
        if detail:
            line += f"  ({detail})"
        tr.write_line(line, green=status == "PASS", red=status == "FAIL")

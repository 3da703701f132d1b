import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_criteria: list[tuple[str, str, str, str]] = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.skipped):
        if rep.passed:
            status = "PASS"
        elif rep.skipped:
            status = "BLOCKED"
        else:
            status = "FAIL"
        detail = "; ".join(str(v) for k, v in item.user_properties if k == "detail")
        if rep.skipped and not detail and isinstance(rep.longrepr, tuple):
            detail = str(rep.longrepr[2]).removeprefix("Skipped: ")
        _criteria.append((mark.args[0], mark.args[1], status, detail))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for cid, title, status, detail in _criteria:
        tr.write_line(f"{status:<8} {cid:<4} {title}" + (f"  [{detail}]" if detail else ""))

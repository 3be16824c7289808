import re
from collections import OrderedDict

import pytest

_CRITERIA = OrderedDict()
_PATTERN = re.compile(r"test_c(\d\d)_(\w+)")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    name = report.nodeid.rsplit("::", 1)[-1]
    match = _PATTERN.match(name)
    if not match:
        return
    detail = dict(report.user_properties).get("detail", "")
    _CRITERIA.setdefault(int(match.group(1)), []).append((match.group(2), report.passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        parts = _CRITERIA[num]
        ok = all(p for _, p, _ in parts)
        subs = "; ".join(f"{name}={'ok' if p else 'FAIL'}" + (f" ({d})" if d else "") for name, p, d in parts)
        tr.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {subs}")

from __future__ import annotations

import os

from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.register_profile("thorough", max_examples=500, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


_acceptance = []


def pytest_runtest_logreport(report):
    if report.nodeid.startswith("tests/test_acceptance.py::") and (report.when == "call" or not report.passed):
        _acceptance.append(report)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for r in _acceptance:
        number, *words = r.nodeid.split("::")[-1].split("_")[2:]
        status = "PASS" if r.passed else r.outcome.upper()
        detail = "; ".join(f"{k} {v}" for k, v in r.user_properties)
        line = f"criterion {int(number)} ({' '.join(words)}): {status}"
        terminalreporter.write_line(line + (f" [{detail}]" if detail else ""))

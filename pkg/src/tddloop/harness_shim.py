"""Reference runner shim: executes workspace tests under pytest, one JSON line per test.

Usage: ``python -m tddloop.harness_shim <workspace> <report>``.

Each test lives in its own ``<test_id>.py`` file next to ``solution.py``.
Result lines are flushed as they happen so a killed run leaves a usable
partial report.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import pytest

IMPL_FILENAME = "solution.py"


class _LineReporter:
    def __init__(self, report_file):
        self.report_file = report_file
        self.reported: set[str] = set()

    def _emit(self, test_id: str, status: str, message: str) -> None:
        if test_id in self.reported:
            return
        self.reported.add(test_id)
        self.report_file.write(
            json.dumps({"test_id": test_id, "status": status, "message": message}) + "\n"
        )
        self.report_file.flush()

    @staticmethod
    def _test_id(nodeid_or_path: str) -> str:
        return Path(str(nodeid_or_path).split("::")[0]).stem

    @pytest.hookimpl(hookwrapper=True)
    def pytest_runtest_makereport(self, item, call):
        outcome = yield
        report = outcome.get_result()
        tid = self._test_id(item.nodeid)
        if report.when == "setup" and report.failed:
            self._emit(tid, "error", _shorten(report.longreprtext))
        elif report.when == "call":
            if report.passed:
                self._emit(tid, "pass", "")
            elif report.skipped:
                self._emit(tid, "error", "skipped")
            else:
                is_assert = call.excinfo is not None and call.excinfo.errisinstance(AssertionError)
                self._emit(tid, "fail" if is_assert else "error", _shorten(report.longreprtext))

    def pytest_collectreport(self, report):
        if report.failed:
            self._emit(self._test_id(report.nodeid), "error", _shorten(report.longreprtext))


def _shorten(text: str, limit: int = 2000) -> str:
    return text if len(text) <= limit else text[:limit] + "...[truncated]"


def main(argv: list[str] | None = None) -> int:
    args = argv if argv is not None else sys.argv[1:]
    if len(args) != 2:
        print("usage: harness_shim <workspace> <report>", file=sys.stderr)
        return 2
    workspace, report_path = Path(args[0]), Path(args[1])
    test_files = sorted(
        str(p) for p in workspace.glob("*.py") if p.name != IMPL_FILENAME and not p.name.startswith("_")
    )
    sys.path.insert(0, str(workspace))
    with open(report_path, "w") as fh:
        reporter = _LineReporter(fh)
        if test_files:
            pytest.main(
                ["-q", "--no-header", "-p", "no:cacheprovider", "--tb=short", *test_files],
                plugins=[reporter],
            )
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Workspace materialization and suite execution through a runner adapter.

The adapter is a command template with ``{workspace}`` and ``{report}``
placeholders; any runner that writes the line-delimited report schema
(``{"test_id": ..., "status": "pass|fail|error", "message": ...}``) is
supported. The reference adapter shells out to the bundled pytest shim.
"""

from __future__ import annotations

import json
import os
import shlex
import subprocess
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path

from .corpus import TestCase
from .errors import HarnessError
from .extraction import CandidateCode

IMPL_FILENAME = "solution.py"
IMPORT_LINE = "from solution import *  # noqa: F401,F403\n"

DEFAULT_TIMEOUT_SECONDS = 30.0
ENV_ALLOWLIST = (
    "PATH",
    "HOME",
    "LANG",
    "LC_ALL",
    "PYTHONPATH",
    "PYTHONHOME",
    "VIRTUAL_ENV",
    "TMPDIR",
    "TEMP",
    "TMP",
    "SYSTEMROOT",
)


class TestStatus(str, Enum):
    __test__ = False

    PASS = "pass"
    FAIL = "fail"
    ERROR = "error"
    TIMEOUT = "timeout"


@dataclass(frozen=True)
class TestResult:
    __test__ = False

    status: TestStatus
    message: str = ""


@dataclass
class TestReport:
    __test__ = False

    results: dict[str, TestResult]
    started: datetime
    finished: datetime

    def all_pass(self) -> bool:
        return all(r.status is TestStatus.PASS for r in self.results.values())

    def passing_ids(self) -> set[str]:
        return {tid for tid, r in self.results.items() if r.status is TestStatus.PASS}

    def failing_ids(self) -> list[str]:
        return [tid for tid, r in self.results.items() if r.status is not TestStatus.PASS]

    def to_payload(self) -> dict:
        return {
            "results": {
                tid: {"status": r.status.value, "message": r.message}
                for tid, r in self.results.items()
            },
            "started": self.started.isoformat(),
            "finished": self.finished.isoformat(),
        }

    @classmethod
    def from_payload(cls, payload: dict) -> TestReport:
        return cls(
            results={
                tid: TestResult(status=TestStatus(r["status"]), message=r["message"])
                for tid, r in payload["results"].items()
            },
            started=datetime.fromisoformat(payload["started"]),
            finished=datetime.fromisoformat(payload["finished"]),
        )


@dataclass
class RunnerAdapter:
    command_template: str
    report_path: Path | None = None  # default: per-workspace, so adapters can be shared
    per_run_timeout: float = DEFAULT_TIMEOUT_SECONDS
    extra_env: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        for placeholder in ("{workspace}", "{report}"):
            if placeholder not in self.command_template:
                raise HarnessError(f"command template must contain {placeholder}")
        if self.per_run_timeout <= 0:
            raise HarnessError("per_run_timeout must be positive")


def default_adapter(per_run_timeout: float = DEFAULT_TIMEOUT_SECONDS) -> RunnerAdapter:
    return RunnerAdapter(
        command_template=f"{sys.executable} -m tddloop.harness_shim {{workspace}} {{report}}",
        per_run_timeout=per_run_timeout,
    )


@dataclass
class Workspace:
    root: Path

    def __post_init__(self):
        self.root = Path(self.root)
        self.root.mkdir(parents=True, exist_ok=True)

    @property
    def impl_file(self) -> Path:
        return self.root / IMPL_FILENAME

    def test_file(self, test_id: str) -> Path:
        return self.root / f"{test_id}.py"


def materialize(workspace: Workspace, code: CandidateCode, tests: list[TestCase]) -> None:
    """Write the implementation and one file per test; drop stale test files.

    Idempotent: identical inputs produce a byte-identical workspace.
    """
    try:
        _write_if_changed(workspace.impl_file, code.code_text.rstrip("\n") + "\n")
        wanted = {t.id for t in tests}
        for test in tests:
            _write_if_changed(workspace.test_file(test.id), IMPORT_LINE + "\n" + test.body.rstrip("\n") + "\n")
        for path in workspace.root.glob("*.py"):
            if path.name == IMPL_FILENAME:
                continue
            if path.stem not in wanted:
                path.unlink()
    except OSError as exc:
        raise HarnessError(f"cannot materialize workspace {workspace.root}: {exc}") from exc


def _write_if_changed(path: Path, content: str) -> None:
    if path.exists() and path.read_text() == content:
        return
    path.write_text(content)


def run(workspace: Workspace, adapter: RunnerAdapter, active_tests: list[str]) -> TestReport:
    """Execute the adapter command and parse the per-test report.

    On a whole-run timeout every unreported test is marked ``timeout``; after
    a normal exit an unreported test is an ``error`` ("missing from report").
    """
    report_path = adapter.report_path or (workspace.root / "_report.jsonl")
    if report_path.exists():
        report_path.unlink()
    argv = [
        arg.replace("{workspace}", str(workspace.root)).replace("{report}", str(report_path))
        for arg in shlex.split(adapter.command_template)
    ]
    env = {k: v for k, v in os.environ.items() if k in ENV_ALLOWLIST}
    env.update({"PYTHONDONTWRITEBYTECODE": "1", "PYTHONHASHSEED": "0"})
    env.update(adapter.extra_env)
    started = datetime.now(timezone.utc)
    timed_out = False
    try:
        subprocess.run(
            argv,
            cwd=workspace.root,
            env=env,
            timeout=adapter.per_run_timeout,
            capture_output=True,
        )
    except subprocess.TimeoutExpired:
        timed_out = True
    except OSError as exc:
        raise HarnessError(f"cannot launch runner {argv[0]!r}: {exc}") from exc
    finished = datetime.now(timezone.utc)
    parsed = _parse_report(report_path) if report_path.exists() else {}
    results: dict[str, TestResult] = {}
    for tid in active_tests:
        if tid in parsed:
            results[tid] = parsed[tid]
        elif timed_out:
            results[tid] = TestResult(TestStatus.TIMEOUT, "whole-run timeout")
        else:
            results[tid] = TestResult(TestStatus.ERROR, "missing from report")
    return TestReport(results=results, started=started, finished=finished)


def _parse_report(path: Path) -> dict[str, TestResult]:
    results: dict[str, TestResult] = {}
    for line in path.read_text().splitlines():
        if not line.strip():
            continue
        try:
            record = json.loads(line)
            status = TestStatus(record["status"])
            results[record["test_id"]] = TestResult(status, record.get("message", ""))
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            raise HarnessError(f"unparsable report line in {path}: {exc}") from exc
    return results

"""Shared fixtures: tiny problem corpora and scripted chat sessions."""

from __future__ import annotations

import json
import re
from pathlib import Path

import pytest

from tddloop.corpus import ProblemManifest, load_problem
from tddloop.providers import ChatSession, ProviderConfig, open_session

_CRITERION = re.compile(r"test_criterion_(\d+[a-z]?)_(\w+)")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion."""
    lines: dict[str, str] = {}
    for status in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(status, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance" not in nodeid:
                continue
            m = _CRITERION.search(nodeid)
            if not m:
                continue
            verdict = "PASS" if status == "passed" else "FAIL"
            label = m.group(2).replace("_", " ")
            lines[m.group(1)] = f"criterion {m.group(1)}: {verdict} — {label}"
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for key in sorted(lines, key=lambda k: (len(k), k)):
            terminalreporter.write_line(lines[key])

ADD_MANUAL_TESTS = '''\
def test_add_positives():
    assert code1(2, 3) == 5


def test_add_mixed():
    assert code1(-2, 3) == 1
'''

ADD_ORACLE_TESTS = '''\
def test_oracle_zero():
    assert code1(0, 0) == 0


def test_oracle_large():
    assert code1(1000, 2345) == 3345
'''

ADD_RETURN_5 = """\
Sure. The minimal code to pass this test just returns the expected value:

```python
def code1(x, y):
    return 5
```
"""

ADD_RETURN_SUM = """\
Both tests need real addition now:

```python
def code1(x, y):
    return x + y
```
"""


def write_problem(
    root: Path,
    problem_id: str,
    signature: str,
    manual_tests: str,
    *,
    difficulty: str = "easy",
    auto_tests: str | None = None,
    oracle_tests: str | None = None,
    hints: list[str] | None = None,
    input_datatypes: list[str] | None = None,
    output_datatype: str = "int",
    original_signature: str | None = None,
    description: str | None = None,
) -> Path:
    pdir = root / problem_id
    pdir.mkdir(parents=True)
    suites = [{"file": "tests_manual.py", "provenance": "manual", "role": "driving"}]
    (pdir / "tests_manual.py").write_text(manual_tests)
    if auto_tests is not None:
        suites.append({"file": "tests_auto.py", "provenance": "automated", "role": "driving"})
        (pdir / "tests_auto.py").write_text(auto_tests)
    manifest = {
        "id": problem_id,
        "difficulty": difficulty,
        "sanitized_signature": signature,
        "input_datatypes": input_datatypes or ["int", "int"],
        "output_datatype": output_datatype,
        "suites": suites,
    }
    if oracle_tests is not None:
        manifest["oracle_suite"] = {
            "file": "tests_oracle.py",
            "provenance": "manual",
            "role": "oracle",
        }
        (pdir / "tests_oracle.py").write_text(oracle_tests)
    if hints:
        manifest["hints"] = hints
    if original_signature:
        manifest["original_signature"] = original_signature
    if description:
        manifest["description"] = description
    (pdir / "manifest.json").write_text(json.dumps(manifest, indent=2))
    return pdir


@pytest.fixture
def corpus_root(tmp_path: Path) -> Path:
    root = tmp_path / "corpus"
    root.mkdir()
    return root


@pytest.fixture
def add_problem(corpus_root: Path) -> ProblemManifest:
    """The two-test integer-addition worked example, no oracle suite."""
    pdir = write_problem(
        corpus_root,
        "lc0001",
        "code1(x, y)",
        ADD_MANUAL_TESTS,
        hints=["keep a running total of both arguments"],
    )
    return load_problem(pdir)


@pytest.fixture
def add_problem_with_oracle(corpus_root: Path) -> ProblemManifest:
    pdir = write_problem(
        corpus_root,
        "lc0001",
        "code1(x, y)",
        ADD_MANUAL_TESTS,
        oracle_tests=ADD_ORACLE_TESTS,
        hints=["keep a running total of both arguments"],
    )
    return load_problem(pdir)


def scripted_session(responses: list[str], session_id: str = "s1") -> ChatSession:
    config = ProviderConfig(kind="scripted", scripted_responses=tuple(responses))
    return open_session(config, session_id=session_id)

"""CLI entry points: run, bench, report, resume exit codes and artifacts."""

from __future__ import annotations

import json

import pytest

from conftest import ADD_RETURN_5, ADD_RETURN_SUM, write_problem
from tddloop.cli import main
from tddloop.journal import read_journal, session_journal_path

BAD = "```python\ndef code1(x, y):\n    return 41\n```"
BAD_A = "```python\ndef code1(x, y):\n    # still looks right to me\n    return 41\n```"
BAD_B = "```python\n# reviewed once more\ndef code1(x, y):\n    return 41\n```"


@pytest.fixture
def cli_corpus(tmp_path):
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    write_problem(
        corpus,
        "lc0001",
        "code1(x, y)",
        (
            "def test_add_positives():\n    assert code1(2, 3) == 5\n\n"
            "def test_add_mixed():\n    assert code1(-2, 3) == 1\n"
        ),
        hints=["add the two arguments"],
    )
    return corpus


def write_scripts(tmp_path, responses, problem_id="lc0001"):
    scripts = tmp_path / "scripts"
    scripts.mkdir(exist_ok=True)
    (scripts / f"{problem_id}.json").write_text(json.dumps(responses))
    return scripts


def base_args(cli_corpus, tmp_path, scripts):
    return [
        "--corpus",
        str(cli_corpus),
        "--out",
        str(tmp_path / "out"),
        "--provider",
        "scripted",
        "--scripts",
        str(scripts),
        "--run-timeout",
        "20",
    ]


class TestCmdRun:
    def test_solved_exit_zero(self, cli_corpus, tmp_path, capsys):
        scripts = write_scripts(tmp_path, [ADD_RETURN_5, ADD_RETURN_SUM])
        code = main(
            ["run", "--problem", "lc0001", "--session-id", "cli1"]
            + base_args(cli_corpus, tmp_path, scripts)
        )
        assert code == 0
        entries = read_journal(session_journal_path(tmp_path / "out", "cli1"))
        assert entries[-1].payload["status"] == "Solved"
        assert "Solved" in capsys.readouterr().out

    def test_repetition_limit_exit_one(self, cli_corpus, tmp_path):
        scripts = write_scripts(tmp_path, [BAD, BAD_A, BAD_B, BAD])
        code = main(
            ["run", "--problem", "lc0001", "--session-id", "cli2"]
            + base_args(cli_corpus, tmp_path, scripts)
        )
        assert code == 1
        entries = read_journal(session_journal_path(tmp_path / "out", "cli2"))
        assert entries[-1].payload == {"status": "Unsolved", "reason": "repetition_limit"}

    def test_unknown_problem_exit_two(self, cli_corpus, tmp_path):
        scripts = write_scripts(tmp_path, [ADD_RETURN_5])
        code = main(
            ["run", "--problem", "lc9999"] + base_args(cli_corpus, tmp_path, scripts)
        )
        assert code == 2

    def test_missing_script_exit_two(self, cli_corpus, tmp_path):
        scripts = tmp_path / "scripts"
        scripts.mkdir()
        code = main(["run", "--problem", "lc0001"] + base_args(cli_corpus, tmp_path, scripts))
        assert code == 2


class TestCmdBenchAndReport:
    def test_bench_writes_results_and_metrics(self, cli_corpus, tmp_path):
        scripts = write_scripts(tmp_path, [ADD_RETURN_5, ADD_RETURN_SUM])
        code = main(["bench", "--parallelism", "2"] + base_args(cli_corpus, tmp_path, scripts))
        assert code == 0
        out = tmp_path / "out"
        results = json.loads((out / "results.json").read_text())
        assert len(results) == 1 and results[0]["solved"]
        metrics = json.loads((out / "metrics.json").read_text())
        assert metrics["success_rate"] == 1.0

    def test_report_recomputes_from_journals(self, cli_corpus, tmp_path, capsys):
        scripts = write_scripts(tmp_path, [ADD_RETURN_5, ADD_RETURN_SUM])
        main(["bench"] + base_args(cli_corpus, tmp_path, scripts))
        live = json.loads((tmp_path / "out" / "metrics.json").read_text())
        code = main(["report", "--out", str(tmp_path / "out")])
        assert code == 0
        recomputed = json.loads((tmp_path / "out" / "metrics.json").read_text())
        assert recomputed == live
        assert "success_rate" in capsys.readouterr().out

    def test_report_without_journals_exit_two(self, tmp_path):
        assert main(["report", "--out", str(tmp_path / "nothing")]) == 2


class TestCmdResume:
    def test_resume_terminal_journal_exit_two(self, cli_corpus, tmp_path, capsys):
        scripts = write_scripts(tmp_path, [ADD_RETURN_5, ADD_RETURN_SUM])
        main(
            ["run", "--problem", "lc0001", "--session-id", "done1"]
            + base_args(cli_corpus, tmp_path, scripts)
        )
        code = main(
            ["resume", "--session-id", "done1"] + base_args(cli_corpus, tmp_path, scripts)
        )
        assert code == 2
        assert "finished" in capsys.readouterr().err

    def test_resume_continues_truncated_session(self, cli_corpus, tmp_path):
        scripts = write_scripts(tmp_path, [ADD_RETURN_5, ADD_RETURN_SUM])
        main(
            ["run", "--problem", "lc0001", "--session-id", "part1"]
            + base_args(cli_corpus, tmp_path, scripts)
        )
        path = session_journal_path(tmp_path / "out", "part1")
        entries = read_journal(path)
        prompt_idx = [i for i, e in enumerate(entries) if e.kind == "PromptSent"]
        keep = entries[: prompt_idx[1] + 1]
        path.write_text("".join(e.to_line() + "\n" for e in keep))
        code = main(
            ["resume", "--session-id", "part1"] + base_args(cli_corpus, tmp_path, scripts)
        )
        assert code == 0
        assert read_journal(path)[-1].payload["status"] == "Solved"

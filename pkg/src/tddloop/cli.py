"""Command-line entry points: run, bench, report, resume, serve."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bench import (
    compare_variants,
    compute_metrics,
    read_results,
    results_from_journal_dir,
    run_bench,
    write_comparison,
    write_metrics,
    write_results,
)
from .corpus import ProblemManifest, load_corpus, load_problem
from .engine import SessionEngine, console_hint_source, new_session_id
from .errors import ConfigError, SessionFinishedError, TddLoopError
from .harness import default_adapter
from .journal import JournalWriter, resume as journal_resume
from .providers import ProviderConfig, open_session
from .session import SessionConfig, SessionStatus

EXIT_SOLVED = 0
EXIT_UNSOLVED = 1
EXIT_CONFIG = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tddloop",
        description="Drive a chat LLM through test-driven code generation, one unit test at a time.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--corpus", required=True, help="problem corpus root directory")
        p.add_argument("--out", required=True, help="output directory (journals, workspaces, reports)")
        p.add_argument("--provider", choices=("remote", "replay", "scripted"), default="scripted")
        p.add_argument("--scripts", help="directory of <problem-id>.json canned-response files")
        p.add_argument("--transcript", help="replay transcript file (single run)")
        p.add_argument("--transcripts", help="directory of <problem-id>.jsonl replay transcripts")
        p.add_argument("--endpoint", help="remote chat-completion URL")
        p.add_argument("--model", help="remote model name")
        p.add_argument("--auth-env", default="TDDLOOP_API_KEY", help="env var holding the credential")
        p.add_argument("--suite", choices=("manual", "automated"), default="manual")
        p.add_argument(
            "--format",
            choices=("default", "plain-text", "meta-test"),
            default="default",
            dest="prompt_format",
        )
        p.add_argument("--threshold", type=float, default=0.95, help="repeat-similarity threshold")
        p.add_argument("--run-timeout", type=float, default=30.0, help="per test-run timeout (s)")

    p_run = sub.add_parser("run", help="run one session")
    add_common(p_run)
    p_run.add_argument("--problem", required=True, help="problem id")
    p_run.add_argument("--interactive", action="store_true", help="ask for hints on the console")
    p_run.add_argument("--session-id", help="explicit session id (default: generated)")

    p_bench = sub.add_parser("bench", help="run every problem in the corpus")
    add_common(p_bench)
    p_bench.add_argument("--parallelism", type=int, default=1)

    p_report = sub.add_parser("report", help="recompute metrics from journals")
    p_report.add_argument("--out", required=True)
    p_report.add_argument("--compare-with", help="results.json of a second variant")
    p_report.add_argument(
        "--group-by", choices=("none", "difficulty", "io_datatypes"), default="difficulty"
    )

    p_resume = sub.add_parser("resume", help="continue an interrupted session")
    add_common(p_resume)
    p_resume.add_argument("--session-id", required=True)
    p_resume.add_argument("--interactive", action="store_true")

    p_serve = sub.add_parser("serve", help="run the HTTP service + web UI backend")
    p_serve.add_argument("--corpus", required=True)
    p_serve.add_argument("--out", required=True)
    p_serve.add_argument("--bind", default="127.0.0.1:8080", help="host:port")
    p_serve.add_argument("--ui-dir", help="static web UI directory to serve at /ui")
    p_serve.add_argument("--run-timeout", type=float, default=30.0)
    return parser


def _provider_config(args, problem_id: str) -> ProviderConfig:
    if args.provider == "scripted":
        if not args.scripts:
            raise ConfigError("scripted provider requires --scripts")
        script_path = Path(args.scripts) / f"{problem_id}.json"
        if not script_path.is_file():
            raise ConfigError(f"no script file for problem {problem_id}: {script_path}")
        responses = json.loads(script_path.read_text())
        return ProviderConfig(kind="scripted", scripted_responses=tuple(responses))
    if args.provider == "replay":
        transcript = args.transcript
        if not transcript and args.transcripts:
            transcript = str(Path(args.transcripts) / f"{problem_id}.jsonl")
        if not transcript:
            raise ConfigError("replay provider requires --transcript or --transcripts")
        return ProviderConfig(kind="replay", transcript_path=transcript)
    if not args.endpoint or not args.model:
        raise ConfigError("remote provider requires --endpoint and --model")
    return ProviderConfig(
        kind="remote",
        endpoint=args.endpoint,
        model_name=args.model,
        auth_env_var=args.auth_env,
    )


def _session_config(args) -> SessionConfig:
    return SessionConfig(
        suite_variant=args.suite,
        prompt_format=args.prompt_format.replace("-", "_"),
        repeat_threshold=args.threshold,
    )


def _find_problem(corpus_root: str, problem_id: str) -> ProblemManifest:
    problem_dir = Path(corpus_root) / problem_id
    if not problem_dir.is_dir():
        raise ConfigError(f"unknown problem id {problem_id!r} under {corpus_root}")
    return load_problem(problem_dir)


def cmd_run(args) -> int:
    manifest = _find_problem(args.corpus, args.problem)
    session_id = args.session_id or new_session_id(manifest.id)
    chat = open_session(_provider_config(args, manifest.id), session_id=session_id)
    journal = JournalWriter(args.out, session_id)
    engine = SessionEngine(
        manifest=manifest,
        config=_session_config(args),
        chat=chat,
        journal=journal,
        workspace_root=Path(args.out) / "workspaces" / session_id,
        adapter=default_adapter(per_run_timeout=args.run_timeout),
        hint_source=console_hint_source() if args.interactive else None,
    )
    state = engine.run_new()
    journal.close()
    print(f"session {session_id}: {state.status.value}"
          + (f" ({state.stop_reason})" if state.stop_reason else ""))
    return EXIT_SOLVED if state.status is SessionStatus.SOLVED else EXIT_UNSOLVED


def cmd_bench(args) -> int:
    corpus = load_corpus(args.corpus)
    if not corpus:
        raise ConfigError(f"corpus {args.corpus} is empty")

    def factory(manifest: ProblemManifest, session_id: str):
        return open_session(_provider_config(args, manifest.id), session_id=session_id)

    results = run_bench(
        corpus,
        factory,
        args.out,
        suite_variant=args.suite,
        prompt_format=args.prompt_format.replace("-", "_"),
        parallelism=args.parallelism,
        adapter=default_adapter(per_run_timeout=args.run_timeout),
        config=_session_config(args),
    )
    out = Path(args.out)
    write_results(results, out / "results.json")
    write_metrics(compute_metrics(results), out / "metrics.json")
    solved = sum(r.solved for r in results)
    print(f"bench: {solved}/{len(results)} solved; results.json and metrics.json written to {out}")
    return EXIT_SOLVED


def cmd_report(args) -> int:
    out = Path(args.out)
    results = results_from_journal_dir(out)
    if not results:
        raise ConfigError(f"no session journals under {out}")
    write_results(results, out / "results.json")
    metrics = compute_metrics(results)
    write_metrics(metrics, out / "metrics.json")
    print(json.dumps(metrics.to_dict(), indent=2))
    if args.compare_with:
        other = read_results(args.compare_with)
        rows = compare_variants(results, other, group_by=args.group_by)
        write_comparison(rows, out / "comparison.csv")
        print(f"comparison.csv written to {out}")
    return EXIT_SOLVED


def cmd_resume(args) -> int:
    corpus_root = Path(args.corpus)

    def resolver(problem_id: str) -> ProblemManifest:
        return _find_problem(corpus_root, problem_id)

    point = journal_resume(args.out, args.session_id, resolver)
    manifest = resolver(point.machine.manifest.id)
    chat = open_session(
        _provider_config(args, manifest.id),
        session_id=args.session_id,
        start_index=point.responses_consumed,
    )
    journal = JournalWriter(args.out, args.session_id)
    engine = SessionEngine(
        manifest=manifest,
        config=point.machine.config,
        chat=chat,
        journal=journal,
        workspace_root=Path(args.out) / "workspaces" / args.session_id,
        adapter=default_adapter(per_run_timeout=args.run_timeout),
        hint_source=console_hint_source() if args.interactive else None,
    )
    state = engine.run_resumed(point)
    journal.close()
    print(f"session {args.session_id}: {state.status.value}")
    return EXIT_SOLVED if state.status is SessionStatus.SOLVED else EXIT_UNSOLVED


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    host, _, port = args.bind.rpartition(":")
    app = create_app(
        corpus_root=Path(args.corpus),
        out_dir=Path(args.out),
        ui_dir=Path(args.ui_dir) if args.ui_dir else None,
        run_timeout=args.run_timeout,
    )
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
    return EXIT_SOLVED


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "run": cmd_run,
        "bench": cmd_bench,
        "report": cmd_report,
        "resume": cmd_resume,
        "serve": cmd_serve,
    }
    try:
        return handlers[args.command](args)
    except SessionFinishedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConfigError, TddLoopError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

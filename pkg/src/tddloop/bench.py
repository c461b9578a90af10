"""Batch execution over a corpus plus aggregate metrics and variant comparisons.

Every per-problem result is derived from the session journal alone, so a
finished batch can be recomputed offline and must produce identical numbers.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable

from .corpus import ProblemManifest
from .engine import SessionEngine, new_session_id
from .errors import ComparisonError
from .harness import RunnerAdapter, default_adapter
from .journal import (
    KIND_OUTCOME,
    KIND_PROMPT_SENT,
    KIND_STATUS,
    JournalEntry,
    JournalWriter,
    read_journal,
    session_journal_path,
)
from .providers import ChatSession
from .session import OutcomeKind, SessionConfig

PRESENTATION_KIND_NAMES = ("Initial", "NextTest", "MetaTestUpdate")

BEHAVIOR_UNIQUE = "unique_code"
BEHAVIOR_REPEATED = "repeated_code"
BEHAVIOR_PASSES_PREV = "new_code_passes_prev"
BEHAVIOR_FAILS_PREV = "new_code_fails_prev"


@dataclass(frozen=True)
class ProblemResult:
    problem_id: str
    difficulty: str
    solved: bool
    oracle_outcome: str  # passed | oracle_failed | oracle_absent
    n_tests: int
    n_prompts: int
    behaviors: tuple[str, ...]
    stop_reason: str
    input_datatypes: tuple[str, ...] = ()
    output_datatype: str = "other"
    session_id: str = ""

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["behaviors"] = sorted(self.behaviors)
        doc["input_datatypes"] = list(self.input_datatypes)
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> ProblemResult:
        return cls(
            problem_id=doc["problem_id"],
            difficulty=doc["difficulty"],
            solved=doc["solved"],
            oracle_outcome=doc["oracle_outcome"],
            n_tests=doc["n_tests"],
            n_prompts=doc["n_prompts"],
            behaviors=tuple(doc["behaviors"]),
            stop_reason=doc["stop_reason"],
            input_datatypes=tuple(doc.get("input_datatypes", ())),
            output_datatype=doc.get("output_datatype", "other"),
            session_id=doc.get("session_id", ""),
        )


def result_from_journal(entries: list[JournalEntry]) -> ProblemResult:
    """Derive one ProblemResult purely from a session journal."""
    config = entries[0].payload["config"]
    n_prompts = 0
    n_tests = 0
    outcome_kinds: list[str] = []
    status = "Unsolved"
    reason = ""
    oracle_outcome = "oracle_absent"
    for entry in entries:
        if entry.kind == KIND_PROMPT_SENT:
            n_prompts += 1
            if entry.payload["kind"] in PRESENTATION_KIND_NAMES:
                n_tests += 1
        elif entry.kind == KIND_OUTCOME:
            outcome_kinds.append(entry.payload["kind"])
        elif entry.kind == KIND_STATUS and entry.payload["status"] != "Running":
            status = entry.payload["status"]
            reason = entry.payload.get("reason", "")
            oracle_outcome = entry.payload.get("oracle_outcome", oracle_outcome)
    behaviors = set()
    if OutcomeKind.REPEATED_CODE.value in outcome_kinds:
        behaviors.add(BEHAVIOR_REPEATED)
    else:
        behaviors.add(BEHAVIOR_UNIQUE)
    if OutcomeKind.REGRESSION_FAILS.value in outcome_kinds:
        behaviors.add(BEHAVIOR_FAILS_PREV)
    if any(
        kind in (OutcomeKind.ALL_PASS.value, OutcomeKind.NEW_TEST_FAILS.value)
        for kind in outcome_kinds[1:]
    ):
        behaviors.add(BEHAVIOR_PASSES_PREV)
    solved = status == "Solved"
    return ProblemResult(
        problem_id=config["problem_id"],
        difficulty=config["difficulty"],
        solved=solved,
        oracle_outcome=oracle_outcome,
        n_tests=n_tests,
        n_prompts=n_prompts,
        behaviors=tuple(sorted(behaviors)),
        stop_reason=reason if reason else ("solved" if solved else status.lower()),
        input_datatypes=tuple(config.get("input_datatypes", ())),
        output_datatype=config.get("output_datatype", "other"),
        session_id=config["session_id"],
    )


ProviderFactory = Callable[[ProblemManifest, str], ChatSession]


def run_bench(
    corpus: list[ProblemManifest],
    provider_factory: ProviderFactory,
    out_dir: Path | str,
    suite_variant: str = "manual",
    prompt_format: str = "default",
    parallelism: int = 1,
    adapter: RunnerAdapter | None = None,
    config: SessionConfig | None = None,
) -> list[ProblemResult]:
    """One journaled session per problem; per-problem failures never abort the batch."""
    if not corpus:
        raise ComparisonError("corpus is empty")
    out = Path(out_dir)

    def run_one(manifest: ProblemManifest) -> ProblemResult:
        session_id = new_session_id(manifest.id)
        session_config = config or SessionConfig()
        session_config = SessionConfig(
            suite_variant=suite_variant,
            prompt_format=prompt_format,
            repeat_threshold=session_config.repeat_threshold,
            max_correctives_per_test=session_config.max_correctives_per_test,
            include_description=session_config.include_description,
        )
        journal = JournalWriter(out, session_id)
        try:
            chat = provider_factory(manifest, session_id)
            engine = SessionEngine(
                manifest=manifest,
                config=session_config,
                chat=chat,
                journal=journal,
                workspace_root=out / "workspaces" / session_id,
                adapter=adapter or default_adapter(),
            )
            engine.run_new()
        except Exception as exc:  # keep the batch going; the journal records the stop
            if not journal.closed:
                journal.append(
                    KIND_STATUS, {"status": "Unsolved", "reason": f"error: {exc}"}
                )
        finally:
            journal.close()
        return result_from_journal(read_journal(session_journal_path(out, session_id)))

    if parallelism <= 1:
        results = [run_one(m) for m in corpus]
    else:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            results = list(pool.map(run_one, corpus))
    return sorted(results, key=lambda r: r.problem_id)


def results_from_journal_dir(out_dir: Path | str) -> list[ProblemResult]:
    """Recompute results offline from the journals alone."""
    sessions = Path(out_dir) / "sessions"
    results = []
    for path in sorted(sessions.glob("*.jsonl")):
        results.append(result_from_journal(read_journal(path)))
    return sorted(results, key=lambda r: r.problem_id)


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AggregateMetrics:
    total: int
    solved: int
    success_rate: float
    tests_total: int
    prompts_total: int
    ratio_lowest_terms: tuple[int, int]  # Σtests : Σprompts
    ratio_decimal: float
    mean_of_per_problem_ratios: float  # secondary reading of the same figure
    behavior_frequencies: dict[str, dict[str, int]]  # flag -> difficulty -> count
    per_difficulty_prompt_means: dict[str, float]

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "solved": self.solved,
            "success_rate": self.success_rate,
            "tests_total": self.tests_total,
            "prompts_total": self.prompts_total,
            "ratio_lowest_terms": f"{self.ratio_lowest_terms[0]}:{self.ratio_lowest_terms[1]}",
            "ratio_decimal": self.ratio_decimal,
            "mean_of_per_problem_ratios": self.mean_of_per_problem_ratios,
            "behavior_frequencies": self.behavior_frequencies,
            "per_difficulty_prompt_means": self.per_difficulty_prompt_means,
        }


def compute_metrics(results: list[ProblemResult]) -> AggregateMetrics:
    if not results:
        raise ComparisonError("cannot compute metrics over an empty result set")
    total = len(results)
    solved = sum(r.solved for r in results)
    tests_total = sum(r.n_tests for r in results)
    prompts_total = sum(r.n_prompts for r in results)
    gcd = math.gcd(tests_total, prompts_total) or 1
    behaviors: dict[str, dict[str, int]] = {
        flag: {"easy": 0, "medium": 0, "hard": 0}
        for flag in (BEHAVIOR_UNIQUE, BEHAVIOR_REPEATED, BEHAVIOR_PASSES_PREV, BEHAVIOR_FAILS_PREV)
    }
    for r in results:
        for flag in r.behaviors:
            if flag in behaviors and r.difficulty in behaviors[flag]:
                behaviors[flag][r.difficulty] += 1
    prompt_means: dict[str, float] = {}
    for difficulty in ("easy", "medium", "hard"):
        group = [r.n_prompts for r in results if r.difficulty == difficulty]
        if group:
            prompt_means[difficulty] = sum(group) / len(group)
    per_problem = [r.n_tests / r.n_prompts for r in results if r.n_prompts > 0]
    return AggregateMetrics(
        total=total,
        solved=solved,
        success_rate=solved / total,
        tests_total=tests_total,
        prompts_total=prompts_total,
        ratio_lowest_terms=(tests_total // gcd, prompts_total // gcd),
        ratio_decimal=tests_total / prompts_total if prompts_total else 0.0,
        mean_of_per_problem_ratios=sum(per_problem) / len(per_problem) if per_problem else 0.0,
        behavior_frequencies=behaviors,
        per_difficulty_prompt_means=prompt_means,
    )


# ---------------------------------------------------------------------------
# Variant comparison
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ComparisonRow:
    group: str
    mean_a: float
    mean_b: float
    factor: float


def compare_variants(
    results_a: list[ProblemResult],
    results_b: list[ProblemResult],
    group_by: str = "none",  # none | difficulty | io_datatypes
) -> list[ComparisonRow]:
    """Prompt-count factors mean(b)/mean(a), per group plus an overall row."""
    by_id_a = {r.problem_id: r for r in results_a}
    by_id_b = {r.problem_id: r for r in results_b}
    missing = sorted(set(by_id_a) ^ set(by_id_b))
    if missing:
        raise ComparisonError(f"result sets cover different problems: {missing}")
    ids = sorted(by_id_a)

    def key(r: ProblemResult) -> str:
        if group_by == "difficulty":
            return r.difficulty
        if group_by == "io_datatypes":
            return f"{'+'.join(r.input_datatypes) or 'none'}->{r.output_datatype}"
        return "all"

    groups: dict[str, list[str]] = {}
    for pid in ids:
        groups.setdefault(key(by_id_a[pid]), []).append(pid)
    rows: list[ComparisonRow] = []
    for group in sorted(groups):
        members = groups[group]
        mean_a = sum(by_id_a[p].n_prompts for p in members) / len(members)
        mean_b = sum(by_id_b[p].n_prompts for p in members) / len(members)
        rows.append(
            ComparisonRow(
                group=group,
                mean_a=mean_a,
                mean_b=mean_b,
                factor=mean_b / mean_a if mean_a else math.inf,
            )
        )
    if group_by != "none":
        mean_a = sum(by_id_a[p].n_prompts for p in ids) / len(ids)
        mean_b = sum(by_id_b[p].n_prompts for p in ids) / len(ids)
        rows.append(
            ComparisonRow(
                group="overall",
                mean_a=mean_a,
                mean_b=mean_b,
                factor=mean_b / mean_a if mean_a else math.inf,
            )
        )
    return rows


# ---------------------------------------------------------------------------
# File exports
# ---------------------------------------------------------------------------


def write_results(results: list[ProblemResult], path: Path | str) -> None:
    Path(path).write_text(json.dumps([r.to_dict() for r in results], indent=2) + "\n")


def read_results(path: Path | str) -> list[ProblemResult]:
    return [ProblemResult.from_dict(doc) for doc in json.loads(Path(path).read_text())]


def write_metrics(metrics: AggregateMetrics, path: Path | str) -> None:
    Path(path).write_text(json.dumps(metrics.to_dict(), indent=2) + "\n")


def write_comparison(rows: list[ComparisonRow], path: Path | str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["group", "mean_a", "mean_b", "factor"])
        for row in rows:
            writer.writerow([row.group, f"{row.mean_a:.6g}", f"{row.mean_b:.6g}", f"{row.factor:.6g}"])

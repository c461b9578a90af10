"""Test-driven LLM code generation loop: corpus, prompts, providers, harness,
session state machine, journaling, and batch metrics."""

from .corpus import (
    LintWarning,
    ProblemManifest,
    SuiteRef,
    TestCase,
    TestSuite,
    lint_suite,
    load_corpus,
    load_problem,
    sanitize_signature,
    write_corpus,
)
from .extraction import CandidateCode, detect_incomplete, extract, normalize
from .harness import RunnerAdapter, TestReport, TestStatus, Workspace, default_adapter, materialize, run
from .journal import JournalEntry, JournalWriter, fold_journal, read_journal, resume
from .prompts import PromptContext, PromptKind, render, render_meta_test, render_plain_text_test
from .providers import ChatSession, ProviderConfig, open_session
from .session import (
    Outcome,
    OutcomeKind,
    SessionConfig,
    SessionMachine,
    SessionState,
    SessionStatus,
    classify,
    is_repeat,
    termination_bound,
)

__version__ = "0.1.0"

__all__ = [
    "CandidateCode",
    "ChatSession",
    "JournalEntry",
    "JournalWriter",
    "LintWarning",
    "Outcome",
    "OutcomeKind",
    "ProblemManifest",
    "PromptContext",
    "PromptKind",
    "ProviderConfig",
    "RunnerAdapter",
    "SessionConfig",
    "SessionMachine",
    "SessionState",
    "SessionStatus",
    "SuiteRef",
    "TestCase",
    "TestReport",
    "TestStatus",
    "TestSuite",
    "Workspace",
    "classify",
    "default_adapter",
    "detect_incomplete",
    "extract",
    "fold_journal",
    "is_repeat",
    "lint_suite",
    "load_corpus",
    "load_problem",
    "materialize",
    "normalize",
    "open_session",
    "read_journal",
    "render",
    "render_meta_test",
    "render_plain_text_test",
    "resume",
    "run",
    "sanitize_signature",
    "termination_bound",
    "write_corpus",
]

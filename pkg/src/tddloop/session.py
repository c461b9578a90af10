"""The session state machine: one test at a time, classify each revision,
escalate on repetition, verify against the oracle suite at the end.

The machine is a pure transition function over explicit events; everything
with side effects (providers, workspaces, journals) lives in the engine so
identical event sequences always produce identical state trajectories.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .corpus import ProblemManifest, TestCase
from .errors import NoCodeFoundError, PlainTextFormatError, StateMachineError
from .extraction import CandidateCode, extract
from .harness import TestReport
from .prompts import (
    PromptContext,
    PromptKind,
    describe_test_inputs,
    initial_preamble,
    render,
    render_meta_test,
    render_plain_text_test,
)
from .similarity import similarity_ratio

DEFAULT_REPEAT_THRESHOLD = 0.95
DEFAULT_MAX_CORRECTIVES = 3


class SessionStatus(str, Enum):
    RUNNING = "Running"
    AWAITING_HINT = "AwaitingHint"
    SOLVED = "Solved"
    UNSOLVED = "Unsolved"
    ABORTED = "Aborted"

    @property
    def terminal(self) -> bool:
        return self in (SessionStatus.SOLVED, SessionStatus.UNSOLVED, SessionStatus.ABORTED)


class OutcomeKind(str, Enum):
    ALL_PASS = "AllPass"
    NEW_TEST_FAILS = "NewTestFails"
    REGRESSION_FAILS = "RegressionFails"
    REPEATED_CODE = "RepeatedCode"
    INCOMPLETE_CODE = "IncompleteCode"
    NO_CODE = "NoCode"


@dataclass(frozen=True)
class Outcome:
    kind: OutcomeKind
    failing_prev_ids: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind is OutcomeKind.REGRESSION_FAILS and not self.failing_prev_ids:
            raise ValueError("RegressionFails requires at least one previously-passing id")


@dataclass
class CodeRevision:
    iteration: int
    candidate: CandidateCode
    report: TestReport
    outcome: Outcome


class Phase(str, Enum):
    AWAIT_START = "await_start"
    AWAIT_RESPONSE = "await_response"
    AWAIT_REPORT = "await_report"
    AWAIT_HINT = "await_hint"
    AWAIT_ORACLE = "await_oracle"
    DONE = "done"


# ---------------------------------------------------------------------------
# Events and actions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Start:
    pass


@dataclass(frozen=True)
class LLMResponse:
    text: str


@dataclass(frozen=True)
class ReportReady:
    report: TestReport


@dataclass(frozen=True)
class HintProvided:
    text: str
    from_bank: bool = False


@dataclass(frozen=True)
class HintUnavailable:
    pass


@dataclass(frozen=True)
class OracleResult:
    passed: bool | None  # None: no oracle suite in the manifest


@dataclass(frozen=True)
class AbortRequested:
    pass


Event = Start | LLMResponse | ReportReady | HintProvided | HintUnavailable | OracleResult | AbortRequested


@dataclass(frozen=True)
class SendPrompt:
    kind: PromptKind
    text: str
    test_id: str | None = None


@dataclass(frozen=True)
class RunTests:
    candidate: CandidateCode


@dataclass(frozen=True)
class RequestHint:
    pass


@dataclass(frozen=True)
class VerifyOracle:
    candidate: CandidateCode


@dataclass(frozen=True)
class Stop:
    status: SessionStatus
    reason: str | None = None
    oracle_outcome: str | None = None


Action = SendPrompt | RunTests | RequestHint | VerifyOracle | Stop

PRESENTATION_KINDS = (PromptKind.INITIAL, PromptKind.NEXT_TEST, PromptKind.META_TEST_UPDATE)


@dataclass
class SessionConfig:
    suite_variant: str = "manual"
    prompt_format: str = "default"  # default | plain_text | meta_test
    repeat_threshold: float = DEFAULT_REPEAT_THRESHOLD
    max_correctives_per_test: int = DEFAULT_MAX_CORRECTIVES
    include_description: bool = False


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------


def is_repeat(
    prev: CandidateCode, new: CandidateCode, threshold: float = DEFAULT_REPEAT_THRESHOLD
) -> bool:
    """Equal normalized token sequences, or token-LCS similarity at/above threshold."""
    if prev.normalized == new.normalized:
        return True
    return similarity_ratio(prev.normalized, new.normalized) >= threshold


def classify(
    prev_passing: set[str],
    report: TestReport,
    prev_revision: CodeRevision | None,
    candidate: CandidateCode | None,
    threshold: float = DEFAULT_REPEAT_THRESHOLD,
) -> Outcome:
    """Precedence: NoCode > IncompleteCode > RepeatedCode > RegressionFails >
    NewTestFails > AllPass."""
    if candidate is None:
        return Outcome(OutcomeKind.NO_CODE)
    if candidate.incomplete:
        return Outcome(OutcomeKind.INCOMPLETE_CODE)
    if prev_revision is not None and is_repeat(prev_revision.candidate, candidate, threshold):
        return Outcome(OutcomeKind.REPEATED_CODE)
    regressed = tuple(tid for tid in report.failing_ids() if tid in prev_passing)
    if regressed:
        return Outcome(OutcomeKind.REGRESSION_FAILS, failing_prev_ids=regressed)
    if report.failing_ids():
        return Outcome(OutcomeKind.NEW_TEST_FAILS)
    return Outcome(OutcomeKind.ALL_PASS)


# ---------------------------------------------------------------------------
# State machine
# ---------------------------------------------------------------------------


@dataclass
class SessionState:
    session_id: str
    problem_id: str
    suite_variant: str
    prompt_format: str
    active_test_index: int = -1
    revisions: list[CodeRevision] = field(default_factory=list)
    outcome_history: list[Outcome] = field(default_factory=list)
    consecutive_repeats: int = 0
    correctives_sent: int = 0  # for the current test; resets when a test is passed
    hint_cursor: int = 0
    prompts_sent: int = 0
    status: SessionStatus = SessionStatus.RUNNING
    phase: Phase = Phase.AWAIT_START
    stop_reason: str | None = None
    oracle_outcome: str | None = None
    last_report: TestReport | None = None
    pending_candidate: CandidateCode | None = None
    presented_test_ids: list[str] = field(default_factory=list)

    def snapshot(self) -> dict:
        """Timestamp-free view used for fold-equals-live comparisons and the API."""
        return {
            "session_id": self.session_id,
            "problem_id": self.problem_id,
            "suite_variant": self.suite_variant,
            "prompt_format": self.prompt_format,
            "active_test_index": self.active_test_index,
            "prompts_sent": self.prompts_sent,
            "consecutive_repeats": self.consecutive_repeats,
            "correctives_sent": self.correctives_sent,
            "hint_cursor": self.hint_cursor,
            "status": self.status.value,
            "phase": self.phase.value,
            "stop_reason": self.stop_reason,
            "oracle_outcome": self.oracle_outcome,
            "presented_test_ids": list(self.presented_test_ids),
            "pending_candidate_hash": self.pending_candidate.content_hash
            if self.pending_candidate
            else None,
            "revisions": [
                {
                    "iteration": rev.iteration,
                    "content_hash": rev.candidate.content_hash,
                    "outcome": rev.outcome.kind.value,
                    "failing_prev_ids": list(rev.outcome.failing_prev_ids),
                    "statuses": {tid: r.status.value for tid, r in rev.report.results.items()},
                }
                for rev in self.revisions
            ],
            "outcome_history": [o.kind.value for o in self.outcome_history],
        }


def termination_bound(n_tests: int, n_hints: int) -> int:
    """Maximum prompts any provider can elicit: one presentation per test,
    at most three corrective prompts per test, plus the hint budget."""
    return n_tests + DEFAULT_MAX_CORRECTIVES * n_tests + n_hints


class SessionMachine:
    """Deterministic transition core; every step consumes one event and yields
    exactly one next action."""

    def __init__(self, manifest: ProblemManifest, config: SessionConfig, session_id: str):
        self.manifest = manifest
        self.config = config
        self.tests: tuple[TestCase, ...] = manifest.driving_suite(config.suite_variant).tests
        self.state = SessionState(
            session_id=session_id,
            problem_id=manifest.id,
            suite_variant=config.suite_variant,
            prompt_format=config.prompt_format,
        )
        self.last_outcome: Outcome | None = None

    # -- event dispatch ----------------------------------------------------

    def step(self, event: Event) -> Action:
        if isinstance(event, AbortRequested):
            if self.state.phase is Phase.DONE:
                raise StateMachineError("session already finished")
            return self._stop(SessionStatus.ABORTED, "aborted")
        if isinstance(event, Start):
            self._expect(Phase.AWAIT_START, event)
            return self._present_test(0)
        if isinstance(event, LLMResponse):
            self._expect(Phase.AWAIT_RESPONSE, event)
            return self._on_response(event.text)
        if isinstance(event, ReportReady):
            self._expect(Phase.AWAIT_REPORT, event)
            return self._on_report(event.report)
        if isinstance(event, HintProvided):
            self._expect(Phase.AWAIT_HINT, event)
            return self._on_hint(event)
        if isinstance(event, HintUnavailable):
            self._expect(Phase.AWAIT_HINT, event)
            return self._stop(SessionStatus.UNSOLVED, "hints_exhausted")
        if isinstance(event, OracleResult):
            self._expect(Phase.AWAIT_ORACLE, event)
            return self._on_oracle(event.passed)
        raise StateMachineError(f"unknown event {event!r}")

    def _expect(self, phase: Phase, event: Event) -> None:
        if self.state.phase is not phase:
            raise StateMachineError(
                f"event {type(event).__name__} is illegal in phase {self.state.phase.value}"
            )

    # -- transitions -------------------------------------------------------

    def _on_response(self, text: str) -> Action:
        s = self.state
        try:
            candidate = extract(text, self.manifest.sanitized_signature)
        except NoCodeFoundError:
            self.last_outcome = Outcome(OutcomeKind.NO_CODE)
            s.outcome_history.append(self.last_outcome)
            return self._corrective_failure(request_complete_code=True)
        s.pending_candidate = candidate
        s.phase = Phase.AWAIT_REPORT
        return RunTests(candidate)

    def _on_report(self, report: TestReport) -> Action:
        s = self.state
        candidate = s.pending_candidate
        if candidate is None:
            raise StateMachineError("no pending candidate for this report")
        prev_rev = s.revisions[-1] if s.revisions else None
        prev_passing = s.last_report.passing_ids() if s.last_report else set()
        outcome = classify(prev_passing, report, prev_rev, candidate, self.config.repeat_threshold)
        repeat_like = prev_rev is not None and is_repeat(
            prev_rev.candidate, candidate, self.config.repeat_threshold
        )
        if outcome.kind is OutcomeKind.REPEATED_CODE:
            s.consecutive_repeats += 1
        elif not repeat_like:
            s.consecutive_repeats = 0
        s.revisions.append(
            CodeRevision(len(s.revisions) + 1, candidate, report, outcome)
        )
        s.outcome_history.append(outcome)
        s.last_report = report
        s.pending_candidate = None
        self.last_outcome = outcome
        return self._after_outcome(outcome, report)

    def _after_outcome(self, outcome: Outcome, report: TestReport) -> Action:
        s = self.state
        if outcome.kind is OutcomeKind.ALL_PASS:
            s.correctives_sent = 0
            if s.active_test_index + 1 < len(self.tests):
                return self._present_test(s.active_test_index + 1)
            final = s.revisions[-1].candidate
            if self.manifest.oracle_suite is not None:
                s.phase = Phase.AWAIT_ORACLE
                return VerifyOracle(final)
            return self._stop(SessionStatus.SOLVED, None, oracle_outcome="oracle_absent")
        if outcome.kind is OutcomeKind.REPEATED_CODE:
            if s.consecutive_repeats >= 3:
                return self._stop(SessionStatus.UNSOLVED, "repetition_limit")
            if s.consecutive_repeats == 2:
                s.phase = Phase.AWAIT_HINT
                s.status = SessionStatus.AWAITING_HINT
                return RequestHint()
            return self._corrective_notice()
        if outcome.kind in (OutcomeKind.INCOMPLETE_CODE, OutcomeKind.NO_CODE):
            return self._corrective_failure(request_complete_code=True)
        return self._corrective_failure(request_complete_code=False)

    def _on_hint(self, event: HintProvided) -> Action:
        s = self.state
        if event.from_bank:
            s.hint_cursor += 1
        s.status = SessionStatus.RUNNING
        text = render(PromptKind.IMPLEMENTATION_HINT, PromptContext(hint_text=event.text))
        return self._send(PromptKind.IMPLEMENTATION_HINT, text)

    def _on_oracle(self, passed: bool | None) -> Action:
        if passed is None:
            return self._stop(SessionStatus.SOLVED, None, oracle_outcome="oracle_absent")
        if passed:
            return self._stop(SessionStatus.SOLVED, None, oracle_outcome="passed")
        return self._stop(SessionStatus.UNSOLVED, "oracle_failed", oracle_outcome="oracle_failed")

    # -- prompt construction ------------------------------------------------

    def _present_test(self, index: int) -> Action:
        s = self.state
        test = self.tests[index]
        kind, text = self._presentation_text(index, test)
        s.active_test_index = index
        s.presented_test_ids.append(test.id)
        return self._send(kind, text, test_id=test.id)

    def _presentation_text(self, index: int, test: TestCase) -> tuple[PromptKind, str]:
        signature = self.manifest.sanitized_signature
        fmt = self.config.prompt_format
        if fmt == "meta_test":
            meta = render_meta_test(self.tests[: index + 1], signature)
            if index == 0:
                return PromptKind.INITIAL, self._initial_text(meta)
            return PromptKind.META_TEST_UPDATE, render(
                PromptKind.META_TEST_UPDATE, PromptContext(meta_test_body=meta)
            )
        if fmt == "plain_text":
            try:
                if index == 0:
                    sentence = render_plain_text_test(test, signature)
                    return PromptKind.INITIAL, self._plain_initial_text(sentence)
                name, inputs, output = describe_test_inputs(test, signature)
                phrase = f"{name} with input {inputs}, expected output: {output}"
                return PromptKind.NEXT_TEST, render(
                    PromptKind.NEXT_TEST, PromptContext(test_body=phrase)
                )
            except PlainTextFormatError:
                pass  # fall back to the code form below
        if index == 0:
            return PromptKind.INITIAL, self._initial_text(test.body)
        return PromptKind.NEXT_TEST, render(PromptKind.NEXT_TEST, PromptContext(test_body=test.body))

    def _initial_text(self, test_rendering: str) -> str:
        text = render(
            PromptKind.INITIAL,
            PromptContext(
                sanitized_signature=self.manifest.sanitized_signature,
                test_body=test_rendering,
            ),
        )
        if self.config.include_description and self.manifest.description:
            text = f"{self.manifest.description}\n\n{text}"
        return text

    def _plain_initial_text(self, sentence: str) -> str:
        text = (
            initial_preamble().replace("[function signature]", self.manifest.sanitized_signature)
            + "\n"
            + sentence
        )
        if self.config.include_description and self.manifest.description:
            text = f"{self.manifest.description}\n\n{text}"
        return text

    def _corrective_notice(self) -> Action:
        if self._correctives_exhausted():
            return self._stop(SessionStatus.UNSOLVED, "iteration_limit")
        self.state.correctives_sent += 1
        return self._send(
            PromptKind.REPETITION_NOTICE, render(PromptKind.REPETITION_NOTICE, PromptContext())
        )

    def _corrective_failure(self, request_complete_code: bool) -> Action:
        if self._correctives_exhausted():
            return self._stop(SessionStatus.UNSOLVED, "iteration_limit")
        self.state.correctives_sent += 1
        failing = self._current_failing_ids()
        text = render(
            PromptKind.TEST_FAILURE,
            PromptContext(failing_test_ids=failing, request_complete_code=request_complete_code),
        )
        return self._send(PromptKind.TEST_FAILURE, text)

    def _current_failing_ids(self) -> tuple[str, ...]:
        s = self.state
        if s.last_report is not None and s.last_report.failing_ids():
            return tuple(s.last_report.failing_ids())
        return (self.tests[max(s.active_test_index, 0)].id,)

    def _correctives_exhausted(self) -> bool:
        return self.state.correctives_sent >= self.config.max_correctives_per_test

    def _send(self, kind: PromptKind, text: str, test_id: str | None = None) -> SendPrompt:
        s = self.state
        s.prompts_sent += 1
        s.phase = Phase.AWAIT_RESPONSE
        s.status = SessionStatus.RUNNING
        return SendPrompt(kind=kind, text=text, test_id=test_id)

    def _stop(self, status: SessionStatus, reason: str | None, oracle_outcome: str | None = None) -> Stop:
        s = self.state
        s.status = status
        s.phase = Phase.DONE
        s.stop_reason = reason
        if oracle_outcome is not None:
            s.oracle_outcome = oracle_outcome
        return Stop(status=status, reason=reason, oracle_outcome=s.oracle_outcome)

    # -- convenience for drivers --------------------------------------------

    def force_stop(self, status: SessionStatus, reason: str | None) -> Stop:
        """Terminal transition imposed by the driver (provider failure, abort)."""
        return self._stop(status, reason)

    @property
    def active_tests(self) -> list[TestCase]:
        return list(self.tests[: self.state.active_test_index + 1])

    def next_bank_hint(self) -> str | None:
        hints = self.manifest.hints
        cursor = self.state.hint_cursor
        return hints[cursor] if cursor < len(hints) else None

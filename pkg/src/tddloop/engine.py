"""Session driver: executes machine actions against real collaborators.

All side effects happen here, in write-ahead order: every prompt, response,
extraction, report, outcome, hint, and status change is journaled before the
loop proceeds.
"""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from .corpus import ProblemManifest, TestSuite
from .errors import ProviderError
from .extraction import CandidateCode
from .harness import RunnerAdapter, TestReport, Workspace, default_adapter, materialize, run
from .journal import (
    KIND_CODE,
    KIND_HINT_PROVIDED,
    KIND_HINT_REQUESTED,
    KIND_OUTCOME,
    KIND_PROMPT_SENT,
    KIND_REPORT,
    KIND_RESPONSE,
    KIND_STATUS,
    JournalWriter,
    ResumePoint,
    config_payload,
)
from .providers import ChatSession
from .session import (
    AbortRequested,
    Action,
    HintProvided,
    HintUnavailable,
    LLMResponse,
    OracleResult,
    ReportReady,
    RequestHint,
    RunTests,
    SendPrompt,
    SessionConfig,
    SessionMachine,
    SessionState,
    SessionStatus,
    Start,
    Stop,
    VerifyOracle,
)

# Hint sources return (text, from_bank); text None means no hint is available.
HintSource = Callable[[SessionState], tuple[str | None, bool]]


def bank_hint_source(machine: SessionMachine) -> HintSource:
    """Batch mode: consume the manifest's hint bank in order."""

    def source(state: SessionState) -> tuple[str | None, bool]:
        return machine.next_bank_hint(), True

    return source


def console_hint_source(prompt: str = "hint> ") -> HintSource:
    def source(state: SessionState) -> tuple[str | None, bool]:
        try:
            text = input(prompt)
        except EOFError:
            return None, False
        return (text.strip() or None), False

    return source


def new_session_id(problem_id: str) -> str:
    return f"{problem_id}-{uuid.uuid4().hex[:8]}"


@dataclass
class SessionEngine:
    manifest: ProblemManifest
    config: SessionConfig
    chat: ChatSession
    journal: JournalWriter
    workspace_root: Path
    adapter: RunnerAdapter = field(default_factory=default_adapter)
    hint_source: HintSource | None = None
    advance_gate: threading.Event | None = None  # set per step in step-confirmation mode
    abort_flag: threading.Event = field(default_factory=threading.Event)
    on_state_change: Callable[[SessionState], None] | None = None

    def __post_init__(self):
        self.machine: SessionMachine | None = None
        self.workspace = Workspace(Path(self.workspace_root) / "driving")

    # -- public entry points --------------------------------------------------

    def run_new(self) -> SessionState:
        self.machine = SessionMachine(self.manifest, self.config, self.journal.session_id)
        self.journal.append(
            KIND_STATUS,
            {
                "status": "Running",
                "config": config_payload(
                    self.manifest, self.config, self.journal.session_id, self.chat.provider_tag
                ),
            },
        )
        action = self.machine.step(Start())
        return self._drive(action)

    def run_resumed(self, point: ResumePoint) -> SessionState:
        self.machine = point.machine
        self.chat.turns = list(point.chat_turns)
        return self._drive(
            point.action,
            prompt_journaled=point.prompt_journaled,
            code_journaled=point.code_journaled,
            outcome_journaled=point.outcome_journaled,
            hint_requested_journaled=point.hint_requested_journaled,
        )

    @property
    def state(self) -> SessionState:
        assert self.machine is not None
        return self.machine.state

    # -- main loop --------------------------------------------------------------

    def _drive(
        self,
        action: Action,
        prompt_journaled: bool = False,
        code_journaled: bool = False,
        outcome_journaled: bool = False,
        hint_requested_journaled: bool = False,
    ) -> SessionState:
        machine = self.machine
        assert machine is not None
        while True:
            self._notify()
            if self.abort_flag.is_set() and not machine.state.status.terminal:
                action = machine.step(AbortRequested())
            if isinstance(action, Stop):
                self._journal_stop(action)
                self._notify()
                return machine.state
            if isinstance(action, SendPrompt):
                if not self._wait_gate():
                    continue  # aborted while gated
                if not prompt_journaled:
                    self.journal.append(
                        KIND_PROMPT_SENT,
                        {
                            "kind": action.kind.value,
                            "text": action.text,
                            **({"test_id": action.test_id} if action.test_id else {}),
                        },
                    )
                prompt_journaled = False
                try:
                    reply = self.chat.send(action.text)
                except ProviderError:
                    action = machine.force_stop(SessionStatus.UNSOLVED, "provider_error")
                    continue
                self.journal.append(KIND_RESPONSE, {"text": reply})
                action = machine.step(LLMResponse(reply))
                code_journaled = False
                if isinstance(action, (SendPrompt, Stop)):  # extraction failed
                    self._journal_outcome()
            elif isinstance(action, RunTests):
                if not code_journaled:
                    self._journal_code(action.candidate)
                code_journaled = False
                report = self._run_driving(action.candidate)
                self.journal.append(KIND_REPORT, {"scope": "driving", **report.to_payload()})
                action = machine.step(ReportReady(report))
                if not outcome_journaled:
                    self._journal_outcome()
                outcome_journaled = False
            elif isinstance(action, RequestHint):
                if not hint_requested_journaled:
                    self.journal.append(KIND_HINT_REQUESTED, {})
                hint_requested_journaled = False
                self._notify()
                text, from_bank = self._get_hint()
                if self.abort_flag.is_set():
                    continue
                if text is None:
                    action = machine.step(HintUnavailable())
                else:
                    self.journal.append(KIND_HINT_PROVIDED, {"text": text, "from_bank": from_bank})
                    action = machine.step(HintProvided(text, from_bank=from_bank))
            elif isinstance(action, VerifyOracle):
                report = self._run_oracle(action.candidate)
                if report is None:
                    action = machine.step(OracleResult(None))
                else:
                    self.journal.append(KIND_REPORT, {"scope": "oracle", **report.to_payload()})
                    action = machine.step(OracleResult(report.all_pass()))
            else:
                raise RuntimeError(f"unhandled action {action!r}")

    # -- helpers ------------------------------------------------------------------

    def _journal_stop(self, action: Stop) -> None:
        payload: dict = {"status": action.status.value}
        if action.reason:
            payload["reason"] = action.reason
        if action.oracle_outcome:
            payload["oracle_outcome"] = action.oracle_outcome
        self.journal.append(KIND_STATUS, payload)

    def _journal_code(self, candidate: CandidateCode) -> None:
        self.journal.append(
            KIND_CODE,
            {
                "code_text": candidate.code_text,
                "target_name_present": candidate.target_name_present,
                "incomplete": candidate.incomplete,
                "content_hash": candidate.content_hash,
            },
        )

    def _journal_outcome(self) -> None:
        machine = self.machine
        assert machine is not None and machine.last_outcome is not None
        outcome = machine.last_outcome
        self.journal.append(
            KIND_OUTCOME,
            {
                "kind": outcome.kind.value,
                "failing_prev_ids": list(outcome.failing_prev_ids),
                "consecutive_repeats": machine.state.consecutive_repeats,
            },
        )

    def _run_driving(self, candidate: CandidateCode) -> TestReport:
        machine = self.machine
        assert machine is not None
        tests = machine.active_tests
        materialize(self.workspace, candidate, tests)
        return run(self.workspace, self.adapter, [t.id for t in tests])

    def _run_oracle(self, candidate: CandidateCode) -> TestReport | None:
        oracle: TestSuite | None = self.manifest.oracle()
        if oracle is None:
            return None
        ws = Workspace(Path(self.workspace_root) / "oracle")
        tests = list(oracle.tests)
        materialize(ws, candidate, tests)
        return run(ws, self.adapter, [t.id for t in tests])

    def _get_hint(self) -> tuple[str | None, bool]:
        machine = self.machine
        assert machine is not None
        source = self.hint_source or bank_hint_source(machine)
        return source(machine.state)

    def _wait_gate(self) -> bool:
        """Block on the step-confirmation gate; False if aborted while waiting."""
        if self.advance_gate is None:
            return True
        while not self.advance_gate.wait(timeout=0.05):
            if self.abort_flag.is_set():
                return False
        self.advance_gate.clear()
        return True

    def _notify(self) -> None:
        if self.on_state_change is not None and self.machine is not None:
            self.on_state_change(self.machine.state)


def verify_oracle(
    manifest: ProblemManifest,
    candidate: CandidateCode,
    adapter: RunnerAdapter,
    workspace_root: Path,
) -> bool | None:
    """Run a candidate against the oracle suite in a fresh workspace.

    Returns None when the manifest has no oracle suite.
    """
    oracle = manifest.oracle()
    if oracle is None:
        return None
    ws = Workspace(Path(workspace_root) / "oracle")
    tests = list(oracle.tests)
    materialize(ws, candidate, tests)
    report = run(ws, adapter, [t.id for t in tests])
    return report.all_pass()

"""Append-only session journal with write-ahead discipline, fold, and resume.

One line-delimited JSON file per session under ``<out>/sessions/<id>.jsonl``.
The journal stores prompts, responses, extracted code, reports, outcomes, and
status changes verbatim; folding a journal re-feeds the recorded inputs
through a fresh state machine, so reconstruction needs no provider access.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable

from .corpus import ProblemManifest
from .errors import JournalCorruptError, JournalError, SessionFinishedError
from .harness import TestReport
from .session import (
    AbortRequested,
    Action,
    HintProvided,
    LLMResponse,
    OracleResult,
    ReportReady,
    RequestHint,
    RunTests,
    SendPrompt,
    SessionConfig,
    SessionMachine,
    SessionStatus,
    Start,
    Stop,
)

KIND_PROMPT_SENT = "PromptSent"
KIND_RESPONSE = "ResponseReceived"
KIND_CODE = "CodeExtracted"
KIND_REPORT = "TestReport"
KIND_OUTCOME = "Outcome"
KIND_HINT_REQUESTED = "HintRequested"
KIND_HINT_PROVIDED = "HintProvided"
KIND_STATUS = "StatusChange"

TERMINAL_STATUSES = ("Solved", "Unsolved", "Aborted")


@dataclass(frozen=True)
class JournalEntry:
    seq: int
    timestamp: str
    session_id: str
    kind: str
    payload: dict

    def to_line(self) -> str:
        return json.dumps(
            {
                "seq": self.seq,
                "timestamp": self.timestamp,
                "session_id": self.session_id,
                "kind": self.kind,
                "payload": self.payload,
            },
            sort_keys=True,
        )


def session_journal_path(out_dir: Path | str, session_id: str) -> Path:
    return Path(out_dir) / "sessions" / f"{session_id}.jsonl"


class JournalWriter:
    """Single writer for one session's journal; rejects gaps and post-terminal writes."""

    def __init__(
        self,
        out_dir: Path | str,
        session_id: str,
        fsync: bool = False,
        on_append: Callable[[JournalEntry], None] | None = None,
    ):
        self.path = session_journal_path(out_dir, session_id)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.session_id = session_id
        self.fsync = fsync
        self.on_append = on_append
        self.last_seq = 0
        self.closed = False
        if self.path.exists():
            entries = read_journal(self.path)
            if entries:
                self.last_seq = entries[-1].seq
                self.closed = _is_terminal(entries[-1])
        self._fh = open(self.path, "a")

    def append(self, kind: str, payload: dict, seq: int | None = None) -> JournalEntry:
        if self.closed:
            raise JournalError(f"session {self.session_id} is closed; journal is terminal")
        expected = self.last_seq + 1
        if seq is not None and seq != expected:
            raise JournalError(f"out-of-order seq {seq}; expected {expected}")
        entry = JournalEntry(
            seq=expected,
            timestamp=datetime.now(timezone.utc).isoformat(),
            session_id=self.session_id,
            kind=kind,
            payload=payload,
        )
        self._fh.write(entry.to_line() + "\n")
        self._fh.flush()
        if self.fsync:
            import os

            os.fsync(self._fh.fileno())
        self.last_seq = entry.seq
        if _is_terminal(entry):
            self.closed = True
        if self.on_append is not None:
            self.on_append(entry)
        return entry

    def close(self) -> None:
        self._fh.close()


def _is_terminal(entry: JournalEntry) -> bool:
    return entry.kind == KIND_STATUS and entry.payload.get("status") in TERMINAL_STATUSES


def read_journal(path: Path | str) -> list[JournalEntry]:
    """Parse a journal file; a corrupt record reports its byte offset."""
    path = Path(path)
    entries: list[JournalEntry] = []
    offset = 0
    data = path.read_bytes()
    for raw_line in data.split(b"\n"):
        if raw_line.strip():
            try:
                doc = json.loads(raw_line)
                entries.append(
                    JournalEntry(
                        seq=doc["seq"],
                        timestamp=doc["timestamp"],
                        session_id=doc["session_id"],
                        kind=doc["kind"],
                        payload=doc["payload"],
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise JournalCorruptError(str(path), offset, str(exc)) from exc
        offset += len(raw_line) + 1
    for i, entry in enumerate(entries, start=1):
        if entry.seq != i:
            raise JournalError(f"journal {path}: seq {entry.seq} at position {i}")
    return entries


# ---------------------------------------------------------------------------
# Fold: rebuild a machine by re-feeding recorded inputs
# ---------------------------------------------------------------------------


@dataclass
class ResumePoint:
    machine: SessionMachine
    action: Action | None
    provider_tag: str
    responses_consumed: int
    chat_turns: list[tuple[str, str]]
    prompt_journaled: bool = False
    code_journaled: bool = False
    outcome_journaled: bool = False
    hint_requested_journaled: bool = False

    @property
    def finished(self) -> bool:
        return isinstance(self.action, Stop) or self.machine.state.status.terminal


def config_payload(
    manifest: ProblemManifest, config: SessionConfig, session_id: str, provider_tag: str
) -> dict:
    return {
        "session_id": session_id,
        "problem_id": manifest.id,
        "difficulty": manifest.difficulty,
        "input_datatypes": list(manifest.input_datatypes),
        "output_datatype": manifest.output_datatype,
        "suite_variant": config.suite_variant,
        "prompt_format": config.prompt_format,
        "repeat_threshold": config.repeat_threshold,
        "max_correctives_per_test": config.max_correctives_per_test,
        "include_description": config.include_description,
        "provider_tag": provider_tag,
    }


def config_from_payload(payload: dict) -> SessionConfig:
    return SessionConfig(
        suite_variant=payload["suite_variant"],
        prompt_format=payload["prompt_format"],
        repeat_threshold=payload["repeat_threshold"],
        max_correctives_per_test=payload["max_correctives_per_test"],
        include_description=payload.get("include_description", False),
    )


def fold_journal(entries: list[JournalEntry], manifest: ProblemManifest) -> ResumePoint:
    """Re-feed journaled inputs through a fresh machine.

    The machine's determinism makes the folded state equal the live one; the
    journaled outputs (prompts, extractions, outcomes) double as integrity
    checks along the way.
    """
    if not entries:
        raise JournalError("empty journal")
    first = entries[0]
    if first.kind != KIND_STATUS or first.payload.get("status") != "Running":
        raise JournalError("journal does not begin with a Running status entry")
    cfg_payload = first.payload["config"]
    if cfg_payload["problem_id"] != manifest.id:
        raise JournalError(
            f"journal is for problem {cfg_payload['problem_id']!r}, not {manifest.id!r}"
        )
    machine = SessionMachine(
        manifest, config_from_payload(cfg_payload), session_id=first.session_id
    )
    action: Action | None = machine.step(Start())
    point = ResumePoint(
        machine=machine,
        action=action,
        provider_tag=cfg_payload.get("provider_tag", ""),
        responses_consumed=0,
        chat_turns=[],
    )
    pending_user: str | None = None
    for entry in entries[1:]:
        kind, payload = entry.kind, entry.payload
        if kind == KIND_PROMPT_SENT:
            if not isinstance(point.action, SendPrompt) or point.action.text != payload["text"]:
                raise JournalError(
                    f"seq {entry.seq}: journaled prompt diverges from the machine's prompt"
                )
            point.prompt_journaled = True
            pending_user = payload["text"]
        elif kind == KIND_RESPONSE:
            point.action = machine.step(LLMResponse(payload["text"]))
            point.responses_consumed += 1
            if pending_user is not None:
                point.chat_turns.append(("user", pending_user))
                point.chat_turns.append(("assistant", payload["text"]))
                pending_user = None
            point.prompt_journaled = False
            point.code_journaled = False
            point.outcome_journaled = False
        elif kind == KIND_CODE:
            if not isinstance(point.action, RunTests) or (
                point.action.candidate.content_hash != payload["content_hash"]
            ):
                raise JournalError(f"seq {entry.seq}: extracted code diverges from the journal")
            point.code_journaled = True
        elif kind == KIND_REPORT and payload.get("scope", "driving") == "driving":
            point.action = machine.step(ReportReady(TestReport.from_payload(payload)))
            point.outcome_journaled = False
        elif kind == KIND_OUTCOME:
            last = machine.last_outcome
            if last is None or last.kind.value != payload["kind"]:
                raise JournalError(f"seq {entry.seq}: outcome diverges from the journal")
            point.outcome_journaled = True
        elif kind == KIND_REPORT:  # oracle scope
            report = TestReport.from_payload(payload)
            point.action = machine.step(OracleResult(report.all_pass()))
        elif kind == KIND_HINT_REQUESTED:
            if not isinstance(point.action, RequestHint):
                raise JournalError(f"seq {entry.seq}: unexpected hint request")
            point.hint_requested_journaled = True
        elif kind == KIND_HINT_PROVIDED:
            point.action = machine.step(
                HintProvided(payload["text"], from_bank=payload.get("from_bank", False))
            )
            point.hint_requested_journaled = False
            point.prompt_journaled = False
        elif kind == KIND_STATUS:
            status = payload["status"]
            if status in TERMINAL_STATUSES:
                if not machine.state.status.terminal:
                    if status == "Aborted":
                        point.action = machine.step(AbortRequested())
                    else:
                        # driver-imposed stop (provider failure etc.): replay it
                        point.action = machine.force_stop(
                            SessionStatus(status), payload.get("reason")
                        )
                if machine.state.status.value != status:
                    raise JournalError(
                        f"seq {entry.seq}: journal says {status}, machine says "
                        f"{machine.state.status.value}"
                    )
        else:
            raise JournalError(f"seq {entry.seq}: unknown journal entry kind {kind!r}")
    return point


def resume(
    out_dir: Path | str,
    session_id: str,
    manifest_resolver: Callable[[str], ProblemManifest],
) -> ResumePoint:
    """Rebuild the pre-crash state of a non-terminal session."""
    path = session_journal_path(out_dir, session_id)
    if not path.exists():
        raise JournalError(f"no journal for session {session_id!r} under {path.parent}")
    entries = read_journal(path)
    if entries and _is_terminal(entries[-1]):
        raise SessionFinishedError(
            f"session {session_id!r} already finished with status "
            f"{entries[-1].payload.get('status')}"
        )
    manifest = manifest_resolver(entries[0].payload["config"]["problem_id"])
    return fold_journal(entries, manifest)


# ---------------------------------------------------------------------------
# Exports
# ---------------------------------------------------------------------------


def journal_to_transcript(entries: list[JournalEntry]) -> list[dict]:
    """Replay-transcript records (user/assistant pairs) from a journal."""
    records: list[dict] = []
    pending_user: str | None = None
    for entry in entries:
        if entry.kind == KIND_PROMPT_SENT:
            pending_user = entry.payload["text"]
        elif entry.kind == KIND_RESPONSE and pending_user is not None:
            records.append({"turn_index": len(records), "role": "user", "text": pending_user})
            records.append(
                {"turn_index": len(records), "role": "assistant", "text": entry.payload["text"]}
            )
            pending_user = None
    return records


def write_transcript_file(entries: list[JournalEntry], path: Path | str) -> None:
    with open(path, "w") as fh:
        for record in journal_to_transcript(entries):
            fh.write(json.dumps(record, sort_keys=True) + "\n")


# timestamps vary per run; provider_tag is run metadata, not session content
_TIME_KEYS = {"timestamp", "started", "finished", "provider_tag"}


def _strip_times(value: Any) -> Any:
    if isinstance(value, dict):
        return {k: _strip_times(v) for k, v in value.items() if k not in _TIME_KEYS}
    if isinstance(value, list):
        return [_strip_times(v) for v in value]
    return value


def normalized_lines(entries: list[JournalEntry]) -> list[str]:
    """Journal lines with timestamps (and provider tag) removed, for byte comparisons."""
    out = []
    for entry in entries:
        doc = {
            "seq": entry.seq,
            "session_id": entry.session_id,
            "kind": entry.kind,
            "payload": _strip_times(entry.payload),
        }
        out.append(json.dumps(doc, sort_keys=True))
    return out

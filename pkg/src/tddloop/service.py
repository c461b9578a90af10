"""HTTP service: start sessions, stream their journals live, steer with hints.

The event stream is plain server-sent events; each journal entry is one
``event:``/``data:`` block whose ``id:`` is the journal seq, so clients can
reconnect from the last seq they saw without duplicates.
"""

from __future__ import annotations

import json
import queue
import threading
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.responses import StreamingResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .corpus import ProblemManifest, load_problem
from .engine import SessionEngine, new_session_id
from .errors import CorpusError, TddLoopError
from .harness import default_adapter
from .journal import JournalEntry, JournalWriter, read_journal
from .providers import ProviderConfig, open_session
from .session import SessionConfig, SessionState, SessionStatus


class ProviderParams(BaseModel):
    kind: str = "scripted"
    responses: list[str] = []
    transcript_path: str | None = None
    endpoint: str | None = None
    model_name: str | None = None
    auth_env_var: str | None = None


class StartSessionRequest(BaseModel):
    problem_id: str
    provider: ProviderParams
    suite_variant: str = "manual"
    prompt_format: str = "default"
    repeat_threshold: float = 0.95
    hint_mode: str = "manual"  # manual: hints arrive via POST; bank: manifest hints
    step_confirm: bool = False
    session_id: str | None = None


class HintRequest(BaseModel):
    text: str
    token: str | None = None


class AckRequest(BaseModel):
    token: str | None = None


@dataclass
class SessionHandle:
    session_id: str
    problem_id: str
    entries: list[JournalEntry] = field(default_factory=list)
    cond: threading.Condition = field(default_factory=threading.Condition)
    hint_queue: "queue.Queue[str | None]" = field(default_factory=queue.Queue)
    abort_flag: threading.Event = field(default_factory=threading.Event)
    advance_gate: threading.Event | None = None
    snapshot: dict = field(default_factory=dict)
    thread: threading.Thread | None = None
    seen_tokens: set[str] = field(default_factory=set)

    @property
    def status(self) -> str:
        return self.snapshot.get("status", "Running")

    @property
    def finished(self) -> bool:
        return self.status in ("Solved", "Unsolved", "Aborted")

    def push_entry(self, entry: JournalEntry) -> None:
        with self.cond:
            self.entries.append(entry)
            self.cond.notify_all()

    def update_snapshot(self, state: SessionState) -> None:
        with self.cond:
            self.snapshot = state.snapshot()
            self.cond.notify_all()

    def duplicate(self, token: str | None) -> bool:
        if token is None:
            return False
        if token in self.seen_tokens:
            return True
        self.seen_tokens.add(token)
        return False


class SessionRegistry:
    def __init__(self, corpus_root: Path, out_dir: Path, run_timeout: float = 30.0):
        self.corpus_root = Path(corpus_root)
        self.out_dir = Path(out_dir)
        self.run_timeout = run_timeout
        self.handles: dict[str, SessionHandle] = {}
        self.lock = threading.Lock()

    # -- lookup ----------------------------------------------------------------

    def manifest(self, problem_id: str) -> ProblemManifest:
        problem_dir = self.corpus_root / problem_id
        if not problem_dir.is_dir():
            raise HTTPException(status_code=404, detail=f"unknown problem {problem_id!r}")
        try:
            return load_problem(problem_dir)
        except CorpusError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc

    def handle(self, session_id: str) -> SessionHandle:
        with self.lock:
            handle = self.handles.get(session_id)
        if handle is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        return handle

    def list_sessions(self) -> list[dict]:
        rows: dict[str, dict] = {}
        sessions_dir = self.out_dir / "sessions"
        if sessions_dir.is_dir():
            for path in sorted(sessions_dir.glob("*.jsonl")):
                try:
                    entries = read_journal(path)
                except TddLoopError:
                    continue
                if not entries:
                    continue
                status = "Running"
                for entry in reversed(entries):
                    if entry.kind == "StatusChange":
                        status = entry.payload["status"]
                        break
                rows[path.stem] = {
                    "session_id": path.stem,
                    "problem_id": entries[0].payload.get("config", {}).get("problem_id", ""),
                    "status": status,
                    "last_seq": entries[-1].seq,
                }
        with self.lock:
            for sid, handle in self.handles.items():
                rows[sid] = {
                    "session_id": sid,
                    "problem_id": handle.problem_id,
                    "status": handle.status,
                    "last_seq": handle.entries[-1].seq if handle.entries else 0,
                }
        return sorted(rows.values(), key=lambda r: r["session_id"])

    # -- lifecycle ---------------------------------------------------------------

    def start_session(self, req: StartSessionRequest) -> SessionHandle:
        manifest = self.manifest(req.problem_id)
        session_id = req.session_id or new_session_id(req.problem_id)
        with self.lock:
            if session_id in self.handles:
                raise HTTPException(status_code=409, detail=f"session {session_id!r} already exists")
        provider_config = ProviderConfig(
            kind=req.provider.kind,
            scripted_responses=tuple(req.provider.responses),
            transcript_path=req.provider.transcript_path,
            endpoint=req.provider.endpoint,
            model_name=req.provider.model_name,
            auth_env_var=req.provider.auth_env_var,
        )
        try:
            chat = open_session(provider_config, session_id=session_id)
        except TddLoopError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        handle = SessionHandle(session_id=session_id, problem_id=req.problem_id)
        if req.step_confirm:
            handle.advance_gate = threading.Event()
        journal = JournalWriter(self.out_dir, session_id, on_append=handle.push_entry)
        config = SessionConfig(
            suite_variant=req.suite_variant,
            prompt_format=req.prompt_format.replace("-", "_"),
            repeat_threshold=req.repeat_threshold,
        )

        def hint_source(state: SessionState) -> tuple[str | None, bool]:
            if req.hint_mode == "bank":
                hints = manifest.hints
                cursor = state.hint_cursor
                return (hints[cursor] if cursor < len(hints) else None), True
            while True:
                try:
                    text = handle.hint_queue.get(timeout=0.1)
                    return text, False
                except queue.Empty:
                    if handle.abort_flag.is_set():
                        return None, False

        engine = SessionEngine(
            manifest=manifest,
            config=config,
            chat=chat,
            journal=journal,
            workspace_root=self.out_dir / "workspaces" / session_id,
            adapter=default_adapter(per_run_timeout=self.run_timeout),
            hint_source=hint_source,
            advance_gate=handle.advance_gate,
            abort_flag=handle.abort_flag,
            on_state_change=handle.update_snapshot,
        )

        def runner() -> None:
            try:
                engine.run_new()
            except TddLoopError as exc:
                if not journal.closed:
                    journal.append("StatusChange", {"status": "Unsolved", "reason": f"error: {exc}"})
                with handle.cond:
                    handle.snapshot = {**handle.snapshot, "status": "Unsolved"}
                    handle.cond.notify_all()
            finally:
                journal.close()

        handle.thread = threading.Thread(target=runner, daemon=True, name=f"session-{session_id}")
        with self.lock:
            self.handles[session_id] = handle
        handle.thread.start()
        return handle

    def snapshot(self, session_id: str) -> dict:
        with self.lock:
            handle = self.handles.get(session_id)
        if handle is not None:
            with handle.cond:
                snap = dict(handle.snapshot)
                snap["last_seq"] = handle.entries[-1].seq if handle.entries else 0
                return snap
        # not live: rebuild from the journal
        path = self.out_dir / "sessions" / f"{session_id}.jsonl"
        if not path.is_file():
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        entries = read_journal(path)
        from .journal import fold_journal

        manifest = self.manifest(entries[0].payload["config"]["problem_id"])
        point = fold_journal(entries, manifest)
        snap = point.machine.state.snapshot()
        snap["last_seq"] = entries[-1].seq
        return snap

    def entries_for(self, session_id: str) -> tuple[SessionHandle | None, list[JournalEntry]]:
        with self.lock:
            handle = self.handles.get(session_id)
        if handle is not None:
            with handle.cond:
                return handle, list(handle.entries)
        path = self.out_dir / "sessions" / f"{session_id}.jsonl"
        if not path.is_file():
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        return None, read_journal(path)


def _sse_block(entry: JournalEntry) -> str:
    data = json.dumps(
        {"seq": entry.seq, "session_id": entry.session_id, "kind": entry.kind, "payload": entry.payload},
        sort_keys=True,
    )
    return f"id: {entry.seq}\nevent: {entry.kind}\ndata: {data}\n\n"


def create_app(
    corpus_root: Path,
    out_dir: Path,
    ui_dir: Path | None = None,
    run_timeout: float = 30.0,
) -> FastAPI:
    app = FastAPI(title="tddloop service")
    registry = SessionRegistry(corpus_root, out_dir, run_timeout=run_timeout)
    app.state.registry = registry

    @app.get("/sessions")
    def list_sessions() -> list[dict]:
        return registry.list_sessions()

    @app.post("/sessions", status_code=201)
    def start_session(req: StartSessionRequest) -> dict:
        handle = registry.start_session(req)
        return {"session_id": handle.session_id, "problem_id": handle.problem_id}

    @app.get("/sessions/{session_id}")
    def session_snapshot(session_id: str) -> dict:
        return registry.snapshot(session_id)

    @app.get("/sessions/{session_id}/events")
    def session_events(session_id: str, from_seq: int = 1):
        handle, _ = registry.entries_for(session_id)

        def generate():
            next_seq = max(from_seq, 1)
            while True:
                if handle is not None:
                    with handle.cond:
                        pending = [e for e in handle.entries if e.seq >= next_seq]
                        finished = handle.finished and not pending
                        if not pending and not finished:
                            handle.cond.wait(timeout=0.2)
                            continue
                else:
                    _, entries = registry.entries_for(session_id)
                    pending = [e for e in entries if e.seq >= next_seq]
                    finished = True
                for entry in pending:
                    yield _sse_block(entry)
                    next_seq = entry.seq + 1
                if finished:
                    return

        return StreamingResponse(generate(), media_type="text/event-stream")

    @app.post("/sessions/{session_id}/hint")
    def submit_hint(session_id: str, req: HintRequest) -> dict:
        handle = registry.handle(session_id)
        if handle.duplicate(req.token):
            return {"accepted": True, "duplicate": True}
        if handle.status != SessionStatus.AWAITING_HINT.value:
            raise HTTPException(
                status_code=409, detail=f"session is {handle.status}, not AwaitingHint"
            )
        handle.hint_queue.put(req.text)
        return {"accepted": True, "duplicate": False}

    @app.post("/sessions/{session_id}/abort")
    def abort_session(session_id: str, req: AckRequest | None = None) -> dict:
        handle = registry.handle(session_id)
        if req and handle.duplicate(req.token):
            return {"status": handle.status, "duplicate": True}
        if not handle.finished:
            handle.abort_flag.set()
            if handle.advance_gate is not None:
                handle.advance_gate.set()
            if handle.thread is not None:
                handle.thread.join(timeout=30.0)
        return {"status": handle.status, "duplicate": False}

    @app.post("/sessions/{session_id}/advance")
    def advance_session(session_id: str, req: AckRequest | None = None) -> dict:
        handle = registry.handle(session_id)
        if req and handle.duplicate(req.token):
            return {"accepted": True, "duplicate": True}
        if handle.advance_gate is None:
            raise HTTPException(status_code=409, detail="session is not in step-confirmation mode")
        handle.advance_gate.set()
        return {"accepted": True, "duplicate": False}

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app

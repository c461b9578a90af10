"""Chat-session interface over LLM backends.

Three interchangeable backends: ``remote`` (chat-completion HTTP API),
``replay`` (deterministic re-run of a recorded transcript), and ``scripted``
(canned responses for tests). The engine only ever sees returned text, so the
backends are fully substitutable.
"""

from __future__ import annotations

import json
import os
import random
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Protocol

import httpx

from .errors import ConfigError, ProviderError, ReplayDivergenceError, ScriptExhaustedError


@dataclass
class ProviderConfig:
    kind: str  # "remote" | "replay" | "scripted"
    endpoint: str | None = None
    model_name: str | None = None
    auth_env_var: str | None = None
    request_timeout: float = 60.0
    max_retries: int = 3
    transcript_path: str | None = None
    scripted_responses: tuple[str, ...] = ()
    sampling: dict = field(default_factory=dict)  # pass-through (temperature, etc.)


@dataclass
class ChatSession:
    """Ordered user/assistant turns bound to one backend.

    Turns strictly alternate starting with ``user`` and are append-only; the
    whole history is resent on every remote call, so the wire protocol stays
    stateless while the session stays stateful.
    """

    session_id: str
    provider_tag: str
    turns: list[tuple[str, str]] = field(default_factory=list)
    _backend: _Backend = None  # type: ignore[assignment]

    def send(self, user_text: str) -> str:
        if self.turns and self.turns[-1][0] != "assistant":
            raise ProviderError("cannot send: awaiting an assistant turn")
        reply = self._backend.complete(self.turns, user_text)
        self.turns.append(("user", user_text))
        self.turns.append(("assistant", reply))
        return reply


class _Backend(Protocol):
    def complete(self, turns: list[tuple[str, str]], user_text: str) -> str: ...


class ScriptedBackend:
    """Replies from a fixed list, in order; raises once exhausted."""

    def __init__(self, responses: tuple[str, ...] | list[str], start_index: int = 0):
        self.responses = list(responses)
        self.index = start_index

    def complete(self, turns: list[tuple[str, str]], user_text: str) -> str:
        if self.index >= len(self.responses):
            raise ScriptExhaustedError(
                f"scripted provider exhausted after {len(self.responses)} responses"
            )
        reply = self.responses[self.index]
        self.index += 1
        return reply


class ReplayBackend:
    """Replays a recorded transcript, enforcing byte-equality of user turns."""

    def __init__(self, transcript_path: str | Path, start_index: int = 0):
        path = Path(transcript_path)
        if not path.is_file():
            raise ProviderError(f"replay transcript not found: {path}")
        self.records: list[dict] = []
        for line in path.read_text().splitlines():
            if line.strip():
                self.records.append(json.loads(line))
        self.records.sort(key=lambda r: r["turn_index"])
        self.cursor = start_index * 2  # one user + one assistant record per exchange

    def complete(self, turns: list[tuple[str, str]], user_text: str) -> str:
        if self.cursor >= len(self.records):
            raise ProviderError("replay transcript exhausted")
        expected_user = self.records[self.cursor]
        if expected_user["role"] != "user":
            raise ProviderError(f"transcript malformed at turn {self.cursor}: expected a user record")
        if expected_user["text"] != user_text:
            raise ReplayDivergenceError(self.cursor, expected_user["text"], user_text)
        if self.cursor + 1 >= len(self.records):
            raise ProviderError("replay transcript ends without an assistant reply")
        reply = self.records[self.cursor + 1]
        if reply["role"] != "assistant":
            raise ProviderError(f"transcript malformed at turn {self.cursor + 1}: expected an assistant record")
        self.cursor += 2
        return reply["text"]


class RemoteBackend:
    """Chat-completion POST client with exponential backoff on transient failures."""

    BACKOFF_BASE_SECONDS = 2.0
    BACKOFF_JITTER = 0.2
    RETRYABLE_STATUS = (429, 500, 502, 503, 504)

    def __init__(
        self,
        config: ProviderConfig,
        client: httpx.Client | None = None,
        sleep: Callable[[float], None] = time.sleep,
        rng: random.Random | None = None,
    ):
        self.config = config
        self.api_key = os.environ[config.auth_env_var]  # presence checked at open time
        self.client = client or httpx.Client(timeout=config.request_timeout)
        self.sleep = sleep
        self.rng = rng or random.Random()

    def complete(self, turns: list[tuple[str, str]], user_text: str) -> str:
        messages = [{"role": role, "content": text} for role, text in turns]
        messages.append({"role": "user", "content": user_text})
        payload = {"model": self.config.model_name, "messages": messages, **self.config.sampling}
        headers = {"Authorization": f"Bearer {self.api_key}"}
        attempt = 0
        while True:
            try:
                resp = self.client.post(self.config.endpoint, json=payload, headers=headers)
            except httpx.HTTPError as exc:
                if attempt >= self.config.max_retries:
                    raise ProviderError(f"transport failure after {attempt} retries: {exc}") from exc
                self._backoff(attempt)
                attempt += 1
                continue
            if resp.status_code in self.RETRYABLE_STATUS:
                if attempt >= self.config.max_retries:
                    raise ProviderError(
                        f"remote returned {resp.status_code} after {attempt} retries"
                    )
                self._backoff(attempt)
                attempt += 1
                continue
            if resp.status_code != 200:
                raise ProviderError(f"remote returned {resp.status_code}: {resp.text[:200]}")
            try:
                return resp.json()["choices"][0]["message"]["content"]
            except (KeyError, IndexError, ValueError) as exc:
                raise ProviderError(f"malformed completion response: {exc}") from exc

    def _backoff(self, attempt: int) -> None:
        delay = self.BACKOFF_BASE_SECONDS * (2**attempt)
        jitter = 1.0 + self.rng.uniform(-self.BACKOFF_JITTER, self.BACKOFF_JITTER)
        self.sleep(delay * jitter)


def open_session(
    config: ProviderConfig,
    session_id: str = "session",
    start_index: int = 0,
    **backend_kwargs,
) -> ChatSession:
    """Validate config and return a fresh session with an empty turn list.

    ``start_index`` skips already-consumed exchanges when resuming a session
    against a scripted or replay backend.
    """
    if config.kind == "scripted":
        backend: _Backend = ScriptedBackend(config.scripted_responses, start_index=start_index)
        tag = "scripted"
    elif config.kind == "replay":
        if not config.transcript_path:
            raise ConfigError("replay provider requires transcript_path")
        backend = ReplayBackend(config.transcript_path, start_index=start_index)
        tag = "replay"
    elif config.kind == "remote":
        missing = [
            name
            for name, value in (
                ("endpoint", config.endpoint),
                ("model_name", config.model_name),
                ("auth_env_var", config.auth_env_var),
            )
            if not value
        ]
        if missing:
            raise ConfigError(f"remote provider requires {', '.join(missing)}")
        if config.auth_env_var not in os.environ:
            raise ConfigError(
                f"credential environment variable {config.auth_env_var!r} is not set"
            )
        backend = RemoteBackend(config, **backend_kwargs)
        tag = f"remote:{config.model_name}"
    else:
        raise ConfigError(f"unknown provider kind {config.kind!r}")
    session = ChatSession(session_id=session_id, provider_tag=tag)
    session._backend = backend
    return session


def write_transcript(path: str | Path, turns: list[tuple[str, str]]) -> None:
    """Write turns in the replay transcript format (one JSON record per line)."""
    with open(path, "w") as fh:
        for i, (role, text) in enumerate(turns):
            fh.write(json.dumps({"turn_index": i, "role": role, "text": text}, sort_keys=True) + "\n")

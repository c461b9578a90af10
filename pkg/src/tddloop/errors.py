"""Exception hierarchy shared across the package."""

from __future__ import annotations


class TddLoopError(Exception):
    """Base class for all package errors."""


class CorpusError(TddLoopError):
    """Problem corpus is missing, malformed, or internally inconsistent."""


class SanitizeError(CorpusError):
    """A function signature could not be parsed for name sanitization."""


class RenderError(TddLoopError):
    """A prompt template was rendered without a required context field."""

    def __init__(self, field: str, kind: str):
        super().__init__(f"prompt kind {kind} requires context field {field!r}")
        self.field = field
        self.kind = kind


class PlainTextFormatError(TddLoopError):
    """Test inputs/outputs are not literal enough for a plain-text rendering."""


class ProviderError(TddLoopError):
    """LLM backend failure (transport, configuration, or exhaustion)."""


class ScriptExhaustedError(ProviderError):
    """A scripted provider ran out of canned responses."""


class ReplayDivergenceError(ProviderError):
    """Prompt sent during replay differs from the recorded transcript."""

    def __init__(self, turn_index: int, expected: str, got: str):
        super().__init__(
            f"replay diverged at turn {turn_index}: "
            f"recorded user text differs from the prompt being sent"
        )
        self.turn_index = turn_index
        self.expected = expected
        self.got = got


class NoCodeFoundError(TddLoopError):
    """Assistant response contained no extractable code."""


class HarnessError(TddLoopError):
    """Workspace materialization or test execution failed."""


class JournalError(TddLoopError):
    """Journal append/read violated the append-only discipline."""


class JournalCorruptError(JournalError):
    """A journal record could not be decoded."""

    def __init__(self, path: str, byte_offset: int, detail: str):
        super().__init__(f"corrupt journal record in {path} at byte {byte_offset}: {detail}")
        self.path = path
        self.byte_offset = byte_offset


class SessionFinishedError(JournalError):
    """Operation requires a live session but the journal is terminal."""


class StateMachineError(TddLoopError):
    """Event is illegal for the session's current status."""


class ComparisonError(TddLoopError):
    """Result sets passed to a variant comparison do not line up."""


class ConfigError(TddLoopError):
    """Invalid run configuration (CLI flags, provider config, paths)."""

"""Pull candidate code out of assistant responses and normalize it for comparison."""

from __future__ import annotations

import ast
import hashlib
import io
import re
import tokenize
from dataclasses import dataclass

from .errors import NoCodeFoundError

_FENCE = re.compile(r"```[ \t]*([A-Za-z0-9_+-]*)[ \t]*\r?\n(.*?)\r?\n?[ \t]*```", re.DOTALL)
_TODO_MARKER = re.compile(r"\b(TODO|FIXME)\b", re.IGNORECASE)


@dataclass(frozen=True)
class LanguageProfile:
    """Lexing hints for the corpus's implementation language."""

    name: str = "python"
    def_pattern: str = r"def\s+{name}\s*\("


PYTHON_PROFILE = LanguageProfile()


@dataclass(frozen=True)
class CandidateCode:
    raw_response: str
    code_text: str
    target_name_present: bool
    incomplete: bool
    normalized: tuple[str, ...]
    content_hash: str


def extract(response: str, sanitized_signature: str, profile: LanguageProfile = PYTHON_PROFILE) -> CandidateCode:
    """Select the implementation from a response.

    Fenced blocks are preferred; among several, the last one defining the
    sanitized function wins, and if none defines it all blocks are
    concatenated in order. A fence-free response is accepted whole only if it
    parses as code containing a function definition.
    """
    target = _target_name(sanitized_signature)
    defines = re.compile(profile.def_pattern.format(name=re.escape(target)))
    blocks = [m.group(2) for m in _FENCE.finditer(response)]
    if blocks:
        defining = [b for b in blocks if defines.search(b)]
        if defining:
            code = defining[-1]
            present = True
        else:
            code = "\n\n".join(blocks)
            present = False
    else:
        code = _bare_code(response)
        if code is None:
            raise NoCodeFoundError("response contains no fenced block and no parseable code")
        present = bool(defines.search(code))
    code = code.strip("\n")
    if not code.strip():
        raise NoCodeFoundError("response code block is empty")
    tokens = normalize(code)
    return CandidateCode(
        raw_response=response,
        code_text=code,
        target_name_present=present,
        incomplete=detect_incomplete(code),
        normalized=tokens,
        content_hash=hashlib.sha256("\x00".join(tokens).encode()).hexdigest(),
    )


def _target_name(signature: str) -> str:
    m = re.match(r"^(?:def\s+)?([A-Za-z_][A-Za-z0-9_]*)\s*\(", signature.strip())
    return m.group(1) if m else signature.strip()


def _bare_code(response: str) -> str | None:
    text = response.strip()
    if not text:
        return None
    try:
        tree = ast.parse(text)
    except SyntaxError:
        return None
    has_def = any(isinstance(n, (ast.FunctionDef, ast.AsyncFunctionDef)) for n in ast.walk(tree))
    return text if has_def else None


def detect_incomplete(code_text: str) -> bool:
    """True iff the code carries a to-do marker, an ellipsis placeholder, or a
    function whose body is a single no-op."""
    lexed, _ = _lex(code_text)
    for tok in lexed:
        if tok.type == tokenize.COMMENT and _TODO_MARKER.search(tok.string):
            return True
        if tok.type == tokenize.STRING and _TODO_MARKER.search(tok.string):
            return True
    try:
        tree = ast.parse(code_text)
    except SyntaxError:
        return False
    for node in ast.walk(tree):
        if isinstance(node, ast.Expr) and isinstance(node.value, ast.Constant) and node.value.value is Ellipsis:
            return True
        if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
            body = [n for n in node.body if not _is_docstring(n)]
            if len(body) == 1 and isinstance(body[0], ast.Pass):
                return True
    return False


def _is_docstring(node: ast.stmt) -> bool:
    return isinstance(node, ast.Expr) and isinstance(node.value, ast.Constant) and isinstance(node.value.value, str)


def normalize(code_text: str) -> tuple[str, ...]:
    """Lex into tokens, dropping comments, blank lines, and all whitespace.

    Identifier spelling is preserved, so renames register as changes. Text
    that does not lex cleanly falls back to whitespace-split words.
    """
    lexed, complete = _lex(code_text)
    if not complete:
        return tuple(code_text.split())
    wanted = {tokenize.NAME, tokenize.OP, tokenize.NUMBER, tokenize.STRING}
    return tuple(tok.string for tok in lexed if tok.type in wanted)


def _lex(code_text: str) -> tuple[list[tokenize.TokenInfo], bool]:
    out: list[tokenize.TokenInfo] = []
    try:
        for tok in tokenize.generate_tokens(io.StringIO(code_text).readline):
            if tok.type == tokenize.ERRORTOKEN:
                return out, False
            out.append(tok)
    except (tokenize.TokenError, IndentationError, SyntaxError):
        return out, False
    return out, True


def pretty_print(tokens: tuple[str, ...]) -> str:
    """Single-line rendering whose normalization is the same token sequence."""
    return " ".join(tokens)

"""Prompt rendering: fixed templates plus the plain-text and consolidated test formats.

Template wording lives in ``templates/*.txt`` so tests can diff the files
directly; rendering only substitutes the bracketed placeholders and never
injects other text.
"""

from __future__ import annotations

import ast
import re
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources

from .corpus import TestCase, signature_parameters
from .errors import PlainTextFormatError, RenderError


class PromptKind(str, Enum):
    INITIAL = "Initial"
    NEXT_TEST = "NextTest"
    TEST_FAILURE = "TestFailure"
    REPETITION_NOTICE = "RepetitionNotice"
    IMPLEMENTATION_HINT = "ImplementationHint"
    PLAIN_TEXT_TEST = "PlainTextTest"
    META_TEST_UPDATE = "MetaTestUpdate"


_TEMPLATE_FILES = {
    PromptKind.INITIAL: "initial.txt",
    PromptKind.NEXT_TEST: "next_test.txt",
    PromptKind.TEST_FAILURE: "test_failure.txt",
    PromptKind.REPETITION_NOTICE: "repetition_notice.txt",
    PromptKind.IMPLEMENTATION_HINT: "implementation_hint.txt",
    PromptKind.PLAIN_TEXT_TEST: "plain_text_test.txt",
    PromptKind.META_TEST_UPDATE: "meta_test_update.txt",
}


def template_text(kind: PromptKind) -> str:
    """Raw template for a prompt kind, without the file's trailing newline."""
    text = resources.files("tddloop.templates").joinpath(_TEMPLATE_FILES[kind]).read_text()
    return text[:-1] if text.endswith("\n") else text


def completeness_clause() -> str:
    text = resources.files("tddloop.templates").joinpath("completeness_clause.txt").read_text()
    return text.strip("\n")


@dataclass(frozen=True)
class PromptContext:
    sanitized_signature: str | None = None
    test_body: str | None = None
    failing_test_ids: tuple[str, ...] = ()
    hint_text: str | None = None
    meta_test_body: str | None = None
    # plain-text format fields
    test_name: str | None = None
    input_text: str | None = None
    output_text: str | None = None
    # appends the completeness clause to a TestFailure prompt
    request_complete_code: bool = field(default=False)


def render(kind: PromptKind, ctx: PromptContext) -> str:
    """Substitute ``ctx`` into the template for ``kind``.

    Raises RenderError naming the first missing required field.
    """
    template = template_text(kind)
    if kind is PromptKind.INITIAL:
        _require(ctx.sanitized_signature, "sanitized_signature", kind)
        _require(ctx.test_body, "test_body", kind)
        return template.replace("[function signature]", ctx.sanitized_signature).replace(
            "[test]", ctx.test_body
        )
    if kind is PromptKind.NEXT_TEST:
        _require(ctx.test_body, "test_body", kind)
        return template.replace("[test]", ctx.test_body)
    if kind is PromptKind.TEST_FAILURE:
        if not ctx.failing_test_ids:
            raise RenderError("failing_test_ids", kind.value)
        text = template.replace("[testid]", ", ".join(ctx.failing_test_ids))
        if ctx.request_complete_code:
            text = f"{text} {completeness_clause()}"
        return text
    if kind is PromptKind.REPETITION_NOTICE:
        return template
    if kind is PromptKind.IMPLEMENTATION_HINT:
        _require(ctx.hint_text, "hint_text", kind)
        return template.replace("[hint text]", ctx.hint_text)
    if kind is PromptKind.PLAIN_TEXT_TEST:
        _require(ctx.test_name, "test_name", kind)
        _require(ctx.input_text, "input_text", kind)
        _require(ctx.output_text, "output_text", kind)
        return (
            template.replace("[name]", ctx.test_name)
            .replace("[inputs]", ctx.input_text)
            .replace("[output]", ctx.output_text)
        )
    if kind is PromptKind.META_TEST_UPDATE:
        _require(ctx.meta_test_body, "meta_test_body", kind)
        return template.replace("[test]", ctx.meta_test_body)
    raise RenderError("kind", str(kind))


def _require(value: str | None, name: str, kind: PromptKind) -> None:
    if value is None:
        raise RenderError(name, kind.value)


def initial_preamble() -> str:
    """Initial template minus its final test-introducing line.

    Used in plain-text mode where the test description sentence carries its
    own introduction.
    """
    lines = template_text(PromptKind.INITIAL).splitlines()
    return "\n".join(lines[:-1])


def describe_test_inputs(test: TestCase, sanitized_signature: str | None = None) -> tuple[str, str, str]:
    """(name, inputs text, output text) for a plain-text rendering.

    The test body must be a single ``assert f(<literals>) == <literal>``.
    List/tuple arguments read as ``array <literal>``; later scalar arguments
    are labeled with their parameter name when the signature is known.
    """
    parsed = _literal_call(test.body)
    if parsed is None:
        raise PlainTextFormatError(
            f"test {test.id!r} does not assert a literal call/result pair"
        )
    arg_nodes, arg_texts, output_text = parsed
    params: tuple[str, ...] = ()
    if sanitized_signature:
        params = signature_parameters(sanitized_signature)
    pieces: list[str] = []
    for i, (node, text) in enumerate(zip(arg_nodes, arg_texts)):
        if isinstance(node, (ast.List, ast.Tuple)):
            pieces.append(f"array {text}")
        elif i > 0 and i < len(params):
            pieces.append(f"{params[i]} = {text}")
        else:
            pieces.append(text)
    return test.name, " and ".join(pieces), output_text


def render_plain_text_test(test: TestCase, sanitized_signature: str | None = None) -> str:
    """One-sentence description of a test: name, literal inputs, expected output."""
    name, inputs, output = describe_test_inputs(test, sanitized_signature)
    return render(
        PromptKind.PLAIN_TEXT_TEST,
        PromptContext(test_name=name, input_text=inputs, output_text=output),
    )


def _literal_call(body: str) -> tuple[list[ast.expr], list[str], str] | None:
    try:
        tree = ast.parse(body)
    except SyntaxError:
        return None
    asserts = [n for n in ast.walk(tree) if isinstance(n, ast.Assert)]
    if len(asserts) != 1:
        return None
    cmp = asserts[0].test
    if not (isinstance(cmp, ast.Compare) and len(cmp.ops) == 1 and isinstance(cmp.ops[0], ast.Eq)):
        return None
    left, right = cmp.left, cmp.comparators[0]
    call = left if isinstance(left, ast.Call) else right if isinstance(right, ast.Call) else None
    expected = right if call is left else left
    if call is None or call.keywords:
        return None
    if not all(_is_literal(a) for a in call.args) or not _is_literal(expected):
        return None
    arg_texts = [ast.get_source_segment(body, a) or "" for a in call.args]
    if any(not t for t in arg_texts):
        return None
    out_text = ast.get_source_segment(body, expected) or ""
    return list(call.args), arg_texts, out_text


def _is_literal(node: ast.expr) -> bool:
    if isinstance(node, ast.Constant):
        return True
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        return _is_literal(node.operand)
    if isinstance(node, (ast.List, ast.Tuple, ast.Set)):
        return all(_is_literal(e) for e in node.elts)
    if isinstance(node, ast.Dict):
        return all(k is not None and _is_literal(k) for k in node.keys) and all(
            _is_literal(v) for v in node.values
        )
    return False


META_TEST_NAME = "test_meta"


def render_meta_test(tests: list[TestCase] | tuple[TestCase, ...], sanitized_signature: str) -> str:
    """Consolidate single-assert tests into one test function, in order.

    Each assert keeps a comment naming its source test, so renderings grow by
    pure appension as tests are added.
    """
    if not tests:
        raise ValueError("render_meta_test requires at least one test")
    blocks: list[str] = []
    for test in tests:
        stmt = _single_assert_source(test)
        blocks.append(f"    # {test.id}\n    {stmt}")
    return f"def {META_TEST_NAME}():\n" + "\n".join(blocks)


def _single_assert_source(test: TestCase) -> str:
    try:
        tree = ast.parse(test.body)
    except SyntaxError as exc:
        raise ValueError(f"test {test.id!r} is not parseable: {exc}") from exc
    asserts = [n for n in ast.walk(tree) if isinstance(n, ast.Assert)]
    if len(asserts) != 1:
        raise ValueError(f"test {test.id!r} must contain exactly one assert")
    seg = ast.get_source_segment(test.body, asserts[0])
    if seg is None:
        raise ValueError(f"test {test.id!r}: cannot slice assert source")
    return re.sub(r"\s+", " ", seg.strip())


RESIDUAL_PLACEHOLDERS = (
    "[test]",
    "[testid]",
    "[function signature]",
    "[name]",
    "[inputs]",
    "[output]",
    "[hint text]",
)


def has_residual_placeholder(rendered: str) -> bool:
    return any(tok in rendered for tok in RESIDUAL_PLACEHOLDERS)

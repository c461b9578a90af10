"""Problem corpus: load, validate, sanitize, and lint problems and their test suites.

Corpus layout on disk::

    <root>/<problem-id>/manifest.json
    <root>/<problem-id>/tests_manual.py      (driving suite, manual provenance)
    <root>/<problem-id>/tests_auto.py        (driving suite, automated provenance)
    <root>/<problem-id>/tests_oracle.py      (held-out ground-truth suite)

Suite files are plain Python sources containing top-level ``test_*`` functions.
A comment line ``# partition: characteristic:block`` directly above a test
attaches a partition label to it.
"""

from __future__ import annotations

import ast
import builtins
import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import CorpusError, SanitizeError

DIFFICULTIES = ("easy", "medium", "hard")
DATATYPES = ("int", "string", "list", "bool", "other")

_PARTITION_COMMENT = re.compile(r"#\s*partition:\s*(\S.*)$")
_NONDESCRIPTIVE_NAME = re.compile(r"^test_?[0-9]+$")
_SANITIZED_NAME = re.compile(r"^code[0-9]+$")


@dataclass(frozen=True)
class SuiteRef:
    """Reference from a manifest to one suite file within the problem directory."""

    file: str
    provenance: str  # "manual" | "automated"
    role: str  # "driving" | "oracle"


@dataclass(frozen=True)
class TestCase:
    __test__ = False  # not a pytest class, despite the name

    id: str
    name: str
    body: str
    partition_labels: tuple[str, ...] = ()
    assert_count: int = 1


@dataclass(frozen=True)
class TestSuite:
    __test__ = False

    tests: tuple[TestCase, ...]
    provenance: str
    role: str


@dataclass
class ProblemManifest:
    """One coding problem: sanitized signature, suites, oracle, and hint bank."""

    id: str
    difficulty: str
    sanitized_signature: str
    input_datatypes: tuple[str, ...]
    output_datatype: str
    suites: tuple[SuiteRef, ...]
    original_signature: str | None = None
    oracle_suite: SuiteRef | None = None
    hints: tuple[str, ...] = ()
    description: str | None = None
    _loaded_suites: dict[str, TestSuite] = field(default_factory=dict, repr=False)

    def suite_for(self, ref: SuiteRef) -> TestSuite:
        return self._loaded_suites[ref.file]

    def driving_suite(self, provenance: str) -> TestSuite:
        """Return the driving suite with the requested provenance."""
        for ref in self.suites:
            if ref.role == "driving" and ref.provenance == provenance:
                return self.suite_for(ref)
        raise CorpusError(f"problem {self.id} has no driving suite with provenance {provenance!r}")

    def oracle(self) -> TestSuite | None:
        return self.suite_for(self.oracle_suite) if self.oracle_suite else None

    @property
    def sanitized_name(self) -> str:
        return _signature_name(self.sanitized_signature)

    @property
    def parameter_names(self) -> tuple[str, ...]:
        return signature_parameters(self.sanitized_signature)


@dataclass(frozen=True)
class LintWarning:
    rule: str  # DescriptiveFunctionName | MetaTest | DuplicateIO | NonDescriptiveTestName
    test_id: str
    detail: str


def sanitize_signature(original_signature: str, problem_id: str) -> str:
    """Replace the function name with ``code<digits-of-id>``, keeping everything else.

    Parameter names and annotations are preserved; leading zeros in the id's
    digits are stripped. Idempotent by construction.
    """
    digits = "".join(ch for ch in problem_id if ch.isdigit()).lstrip("0")
    if not digits:
        raise SanitizeError(f"problem id {problem_id!r} contains no digits to build a generic name")
    header = original_signature.strip()
    m = re.match(r"^(def\s+)?([A-Za-z_][A-Za-z0-9_]*)(\s*\()", header)
    if not m or "(" not in header:
        raise SanitizeError(f"cannot parse function header: {original_signature!r}")
    prefix = m.group(1) or ""
    rest = header[m.end(2):]
    return f"{prefix}code{digits}{rest}"


def _signature_name(signature: str) -> str:
    m = re.match(r"^(?:def\s+)?([A-Za-z_][A-Za-z0-9_]*)\s*\(", signature.strip())
    if not m:
        raise SanitizeError(f"cannot parse function header: {signature!r}")
    return m.group(1)


def signature_parameters(signature: str) -> tuple[str, ...]:
    """Parameter names of a function header, in declaration order."""
    header = signature.strip()
    if not header.startswith("def "):
        header = "def " + header
    header = header.rstrip(":")
    try:
        tree = ast.parse(f"{header}:\n    pass")
        fn = tree.body[0]
        assert isinstance(fn, ast.FunctionDef)
    except (SyntaxError, AssertionError) as exc:
        raise SanitizeError(f"cannot parse function header: {signature!r}") from exc
    args = fn.args
    names = [a.arg for a in args.posonlyargs + args.args]
    names.extend(a.arg for a in args.kwonlyargs)
    return tuple(n for n in names if n != "self")


def parse_suite_source(source: str, provenance: str, role: str) -> TestSuite:
    """Parse a suite file: top-level ``test_*`` functions become TestCases, in order."""
    try:
        tree = ast.parse(source)
    except SyntaxError as exc:
        raise CorpusError(f"suite file is not valid Python: {exc}") from exc
    lines = source.splitlines()
    tests: list[TestCase] = []
    for node in tree.body:
        if not isinstance(node, ast.FunctionDef) or not node.name.startswith("test"):
            continue
        start = node.lineno - 1
        if node.decorator_list:
            start = node.decorator_list[0].lineno - 1
        body = "\n".join(lines[start:node.end_lineno])
        labels = _partition_labels(lines, start)
        assert_count = sum(isinstance(n, ast.Assert) for n in ast.walk(node))
        tests.append(
            TestCase(
                id=node.name,
                name=node.name,
                body=body,
                partition_labels=labels,
                assert_count=max(assert_count, _call_assert_count(node)),
            )
        )
    if not tests:
        raise CorpusError("suite file defines no test functions")
    seen: set[str] = set()
    for t in tests:
        if t.id in seen:
            raise CorpusError(f"duplicate test id {t.id!r} in suite")
        seen.add(t.id)
    return TestSuite(tests=tuple(tests), provenance=provenance, role=role)


def _partition_labels(lines: list[str], def_line: int) -> tuple[str, ...]:
    labels: list[str] = []
    i = def_line - 1
    while i >= 0:
        m = _PARTITION_COMMENT.search(lines[i].strip())
        if not m:
            break
        labels.append(m.group(1).strip())
        i -= 1
    return tuple(reversed(labels))


def _call_assert_count(node: ast.FunctionDef) -> int:
    # unittest-style helpers (assertEqual and friends) count as asserts too
    count = 0
    for n in ast.walk(node):
        if isinstance(n, ast.Call) and isinstance(n.func, ast.Attribute):
            if n.func.attr.startswith("assert"):
                count += 1
    return count


def load_problem(problem_dir: Path) -> ProblemManifest:
    manifest_path = problem_dir / "manifest.json"
    if not manifest_path.is_file():
        raise CorpusError(f"missing manifest file: {manifest_path}")
    try:
        raw = json.loads(manifest_path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise CorpusError(f"unparsable manifest {manifest_path}: {exc}") from exc
    manifest = _manifest_from_dict(raw, manifest_path)
    for ref in list(manifest.suites) + ([manifest.oracle_suite] if manifest.oracle_suite else []):
        suite_path = problem_dir / ref.file
        if not suite_path.is_file():
            raise CorpusError(
                f"manifest {manifest_path} references missing suite file {ref.file!r}"
            )
        manifest._loaded_suites[ref.file] = parse_suite_source(
            suite_path.read_text(), provenance=ref.provenance, role=ref.role
        )
    return manifest


def _manifest_from_dict(raw: dict, path: Path) -> ProblemManifest:
    try:
        problem_id = raw["id"]
        difficulty = raw["difficulty"]
        sanitized = raw["sanitized_signature"]
        suites = tuple(SuiteRef(**ref) for ref in raw["suites"])
    except (KeyError, TypeError) as exc:
        raise CorpusError(f"manifest {path} missing required field: {exc}") from exc
    if not problem_id:
        raise CorpusError(f"manifest {path} has an empty id")
    if difficulty not in DIFFICULTIES:
        raise CorpusError(f"manifest {path}: unknown difficulty {difficulty!r}")
    if not _SANITIZED_NAME.match(_signature_name(sanitized)):
        raise CorpusError(
            f"manifest {path}: sanitized_signature must use a generic code<digits> name"
        )
    if not suites:
        raise CorpusError(f"manifest {path} lists no suites")
    oracle_raw = raw.get("oracle_suite")
    return ProblemManifest(
        id=problem_id,
        difficulty=difficulty,
        original_signature=raw.get("original_signature"),
        sanitized_signature=sanitized,
        input_datatypes=tuple(raw.get("input_datatypes", ())),
        output_datatype=raw.get("output_datatype", "other"),
        suites=suites,
        oracle_suite=SuiteRef(**oracle_raw) if oracle_raw else None,
        hints=tuple(raw.get("hints", ())),
        description=raw.get("description"),
    )


def load_corpus(root_path: Path | str) -> list[ProblemManifest]:
    """Load every problem under ``root_path``, sorted by id. Empty dir is fine."""
    root = Path(root_path)
    if not root.is_dir():
        raise CorpusError(f"corpus root does not exist: {root}")
    manifests: list[ProblemManifest] = []
    for problem_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        manifests.append(load_problem(problem_dir))
    seen: set[str] = set()
    for m in manifests:
        if m.id in seen:
            raise CorpusError(f"duplicate problem id {m.id!r} in corpus")
        seen.add(m.id)
    return sorted(manifests, key=lambda m: m.id)


def write_corpus(manifests: list[ProblemManifest], root_path: Path | str) -> None:
    """Serialize manifests back to the on-disk layout (inverse of load_corpus)."""
    root = Path(root_path)
    for m in manifests:
        pdir = root / m.id
        pdir.mkdir(parents=True, exist_ok=True)
        doc: dict = {
            "id": m.id,
            "difficulty": m.difficulty,
            "sanitized_signature": m.sanitized_signature,
            "input_datatypes": list(m.input_datatypes),
            "output_datatype": m.output_datatype,
            "suites": [vars(r) for r in m.suites],
        }
        if m.original_signature is not None:
            doc["original_signature"] = m.original_signature
        if m.oracle_suite is not None:
            doc["oracle_suite"] = vars(m.oracle_suite)
        if m.hints:
            doc["hints"] = list(m.hints)
        if m.description is not None:
            doc["description"] = m.description
        (pdir / "manifest.json").write_text(json.dumps(doc, indent=2) + "\n")
        refs = list(m.suites) + ([m.oracle_suite] if m.oracle_suite else [])
        for ref in refs:
            suite = m.suite_for(ref)
            body = "\n\n\n".join(_test_source(t) for t in suite.tests) + "\n"
            (pdir / ref.file).write_text(body)


def _test_source(test: TestCase) -> str:
    label_lines = [f"# partition: {label}" for label in test.partition_labels]
    return "\n".join(label_lines + [test.body])


def lint_suite(suite: TestSuite, manifest: ProblemManifest) -> list[LintWarning]:
    """Advisory checks on a suite; never raises, never mutates.

    Rules: DescriptiveFunctionName (test calls a name other than the sanitized
    one), MetaTest (more than one assert), DuplicateIO (two tests exercise the
    same input/expected-output text), NonDescriptiveTestName (name is just
    ``test<number>``).
    """
    warnings: list[LintWarning] = []
    sanitized = manifest.sanitized_name
    builtin_names = set(dir(builtins))
    io_seen: dict[tuple[str, str], str] = {}
    for test in suite.tests:
        for called in _called_names(test.body):
            if called != sanitized and called not in builtin_names:
                warnings.append(
                    LintWarning(
                        rule="DescriptiveFunctionName",
                        test_id=test.id,
                        detail=f"calls {called!r} instead of the sanitized name {sanitized!r}",
                    )
                )
        if test.assert_count > 1:
            warnings.append(
                LintWarning(
                    rule="MetaTest",
                    test_id=test.id,
                    detail=f"{test.assert_count} asserts in one test obscure which behavior failed",
                )
            )
        if _NONDESCRIPTIVE_NAME.match(test.name):
            warnings.append(
                LintWarning(
                    rule="NonDescriptiveTestName",
                    test_id=test.id,
                    detail="numbered test names carry no behavioral context",
                )
            )
        io = _io_text(test.body)
        if io is not None:
            if io in io_seen:
                warnings.append(
                    LintWarning(
                        rule="DuplicateIO",
                        test_id=test.id,
                        detail=f"same input/expected output as {io_seen[io]!r}",
                    )
                )
            else:
                io_seen[io] = test.id
    return warnings


def _called_names(body: str) -> list[str]:
    try:
        tree = ast.parse(body)
    except SyntaxError:
        return []
    names: list[str] = []
    for node in ast.walk(tree):
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name):
            names.append(node.func.id)
    return names


def _io_text(body: str) -> tuple[str, str] | None:
    """(input text, expected output text) of a single ``assert f(args) == expected``."""
    try:
        tree = ast.parse(body)
    except SyntaxError:
        return None
    for node in ast.walk(tree):
        if not isinstance(node, ast.Assert):
            continue
        cmp = node.test
        if not (isinstance(cmp, ast.Compare) and len(cmp.ops) == 1 and isinstance(cmp.ops[0], ast.Eq)):
            continue
        left, right = cmp.left, cmp.comparators[0]
        call = left if isinstance(left, ast.Call) else right if isinstance(right, ast.Call) else None
        other = right if call is left else left
        if call is None:
            continue
        args_text = ", ".join(ast.get_source_segment(body, a) or "" for a in call.args)
        expected_text = ast.get_source_segment(body, other) or ""
        return (args_text.strip(), expected_text.strip())
    return None

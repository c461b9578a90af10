"""Corpus loading, signature sanitization, and suite lint."""

from __future__ import annotations

import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tddloop.corpus import (
    LintWarning,
    lint_suite,
    load_corpus,
    load_problem,
    parse_suite_source,
    sanitize_signature,
    signature_parameters,
    write_corpus,
)
from tddloop.errors import CorpusError, SanitizeError

from conftest import ADD_MANUAL_TESTS, write_problem


class TestSanitizeSignature:
    def test_descriptive_name_replaced(self):
        # a descriptive name would bias generation toward the wrong problem
        assert (
            sanitize_signature("findMedianSortedArrays(nums1, nums2)", "lc0768")
            == "code768(nums1, nums2)"
        )

    def test_already_sanitized_unchanged(self):
        assert sanitize_signature("code234(head)", "lc0234") == "code234(head)"

    def test_rename_rule_golden(self):
        # golden value from applying the rename rule by hand
        assert sanitize_signature("moveZeroes(nums)", "lc0283") == "code283(nums)"

    def test_def_prefix_and_annotations_kept(self):
        out = sanitize_signature("def isPalindrome(head: Optional[ListNode]) -> bool:", "lc0234")
        assert out == "def code234(head: Optional[ListNode]) -> bool:"

    def test_unparsable_header(self):
        with pytest.raises(SanitizeError):
            sanitize_signature("not a header", "lc0001")

    def test_id_without_digits(self):
        with pytest.raises(SanitizeError):
            sanitize_signature("f(x)", "nodigits")

    @given(st.sampled_from(["lc0283", "lc0001", "p9", "x0042"]))
    def test_idempotent(self, problem_id):
        first = sanitize_signature("moveZeroes(nums, k)", problem_id)
        assert sanitize_signature(first, problem_id) == first

    def test_parameter_names(self):
        assert signature_parameters("code1(nums, k)") == ("nums", "k")
        assert signature_parameters("def code2(s: str) -> int:") == ("s",)


class TestLoadCorpus:
    def test_three_problems_sorted(self, corpus_root):
        for pid in ("lc0300", "lc0100", "lc0200"):
            write_problem(corpus_root, pid, f"code{int(pid[2:])}(x, y)", ADD_MANUAL_TESTS.replace("code1", f"code{int(pid[2:])}"))
        manifests = load_corpus(corpus_root)
        assert [m.id for m in manifests] == ["lc0100", "lc0200", "lc0300"]
        assert all(len(m.driving_suite("manual").tests) == 2 for m in manifests)

    def test_empty_directory(self, corpus_root):
        assert load_corpus(corpus_root) == []

    def test_dangling_suite_ref_names_the_file(self, corpus_root):
        pdir = write_problem(corpus_root, "lc0007", "code7(x, y)", ADD_MANUAL_TESTS.replace("code1", "code7"))
        manifest = json.loads((pdir / "manifest.json").read_text())
        manifest["suites"].append({"file": "tests_manual2.py", "provenance": "manual", "role": "driving"})
        (pdir / "manifest.json").write_text(json.dumps(manifest))
        with pytest.raises(CorpusError, match="tests_manual2.py"):
            load_corpus(corpus_root)

    def test_unparsable_manifest_names_the_file(self, corpus_root):
        pdir = corpus_root / "lc0009"
        pdir.mkdir()
        (pdir / "manifest.json").write_text("{not json")
        with pytest.raises(CorpusError, match="lc0009"):
            load_corpus(corpus_root)

    def test_missing_manifest(self, corpus_root):
        (corpus_root / "lc0010").mkdir()
        with pytest.raises(CorpusError, match="manifest"):
            load_corpus(corpus_root)

    def test_round_trip(self, corpus_root, tmp_path, add_problem_with_oracle):
        manifests = load_corpus(corpus_root)
        out = tmp_path / "copy"
        write_corpus(manifests, out)
        reloaded = load_corpus(out)
        assert len(reloaded) == len(manifests)
        for a, b in zip(manifests, reloaded):
            assert a.id == b.id
            assert a.sanitized_signature == b.sanitized_signature
            assert a.hints == b.hints
            assert a.suites == b.suites
            assert a.oracle_suite == b.oracle_suite
            for ref in a.suites:
                assert [t.body for t in a.suite_for(ref).tests] == [
                    t.body for t in b.suite_for(ref).tests
                ]


class TestSuiteParsing:
    def test_partition_labels(self):
        src = (
            "# partition: size:empty\n"
            "def test_empty_array():\n"
            "    assert code42([]) == []\n"
        )
        suite = parse_suite_source(src, "manual", "driving")
        assert suite.tests[0].partition_labels == ("size:empty",)

    def test_assert_count(self):
        src = (
            "def test_multi():\n"
            "    assert code42(1) == 1\n"
            "    assert code42(2) == 2\n"
        )
        suite = parse_suite_source(src, "manual", "driving")
        assert suite.tests[0].assert_count == 2

    def test_presentation_order_is_file_order(self):
        src = (
            "def test_b():\n    assert code42(2) == 2\n\n"
            "def test_a():\n    assert code42(1) == 1\n"
        )
        suite = parse_suite_source(src, "manual", "driving")
        assert [t.id for t in suite.tests] == ["test_b", "test_a"]

    def test_empty_suite_rejected(self):
        with pytest.raises(CorpusError):
            parse_suite_source("x = 1\n", "manual", "driving")


class TestLintSuite:
    def _manifest(self, corpus_root, tests_src):
        pdir = write_problem(corpus_root, "lc0020", "code20(x, y)", tests_src)
        return load_problem(pdir)

    def test_meta_test_warning(self, corpus_root):
        src = (
            "def test_all_cases():\n"
            "    assert code20(2, 3) == 5\n"
            "    assert code20(-2, 3) == 1\n"
            "    assert code20(0, 0) == 0\n"
        )
        manifest = self._manifest(corpus_root, src)
        warnings = lint_suite(manifest.driving_suite("manual"), manifest)
        assert [w.rule for w in warnings] == ["MetaTest"]

    def test_duplicate_io_warning(self, corpus_root):
        src = (
            "def test_first_sum():\n    assert code20(2, 3) == 5\n\n"
            "def test_second_sum():\n    assert code20(2, 3) == 5\n"
        )
        manifest = self._manifest(corpus_root, src)
        warnings = lint_suite(manifest.driving_suite("manual"), manifest)
        assert [w.rule for w in warnings] == ["DuplicateIO"]
        assert warnings[0].test_id == "test_second_sum"

    def test_descriptive_function_name_warning(self, corpus_root):
        src = "def test_sum():\n    assert add(2, 3) == 5\n"
        manifest = self._manifest(corpus_root, src)
        warnings = lint_suite(manifest.driving_suite("manual"), manifest)
        assert [w.rule for w in warnings] == ["DescriptiveFunctionName"]
        assert "add" in warnings[0].detail

    def test_nondescriptive_name_warning(self, corpus_root):
        src = "def test_1():\n    assert code20(2, 3) == 5\n"
        manifest = self._manifest(corpus_root, src)
        warnings = lint_suite(manifest.driving_suite("manual"), manifest)
        assert [w.rule for w in warnings] == ["NonDescriptiveTestName"]

    def test_clean_suite_no_warnings(self, corpus_root):
        src = (
            "def test_add_positives():\n    assert code20(2, 3) == 5\n\n"
            "def test_add_mixed():\n    assert code20(-2, 3) == 1\n"
        )
        manifest = self._manifest(corpus_root, src)
        assert lint_suite(manifest.driving_suite("manual"), manifest) == []

    def test_lint_is_deterministic_and_pure(self, corpus_root):
        src = (
            "def test_1():\n    assert add(2, 3) == 5\n\n"
            "def test_2():\n    assert add(2, 3) == 5\n"
        )
        manifest = self._manifest(corpus_root, src)
        suite = manifest.driving_suite("manual")
        before = [t.body for t in suite.tests]
        first = lint_suite(suite, manifest)
        second = lint_suite(suite, manifest)
        assert first == second
        assert isinstance(first[0], LintWarning)
        assert [t.body for t in suite.tests] == before

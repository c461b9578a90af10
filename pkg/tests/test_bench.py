"""Batch execution, aggregate metrics, and variant comparisons."""

from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import ADD_RETURN_5, ADD_RETURN_SUM, scripted_session, write_problem
from tddloop.bench import (
    AggregateMetrics,
    ProblemResult,
    compare_variants,
    compute_metrics,
    read_results,
    results_from_journal_dir,
    run_bench,
    write_comparison,
    write_metrics,
    write_results,
)
from tddloop.corpus import load_corpus
from tddloop.errors import ComparisonError
from tddloop.harness import default_adapter


def _result(pid, prompts, tests=5, difficulty="easy", solved=True, behaviors=(), **kw) -> ProblemResult:
    return ProblemResult(
        problem_id=pid,
        difficulty=difficulty,
        solved=solved,
        oracle_outcome="oracle_absent",
        n_tests=tests,
        n_prompts=prompts,
        behaviors=tuple(behaviors),
        stop_reason="solved" if solved else "repetition_limit",
        **kw,
    )


class TestComputeMetrics:
    def test_success_rate_62_of_70(self):
        results = [_result(f"p{i:02d}", 8, solved=(i < 62)) for i in range(70)]
        metrics = compute_metrics(results)
        assert abs(metrics.success_rate - 0.885) <= 0.001
        assert metrics.solved == 62 and metrics.total == 70

    def test_uniform_ratio_5_to_8(self):
        results = [_result(f"p{i:02d}", prompts=8, tests=5) for i in range(70)]
        metrics = compute_metrics(results)
        assert metrics.ratio_lowest_terms == (5, 8)
        assert metrics.ratio_decimal == pytest.approx(0.625)

    def test_single_ideal_problem(self):
        metrics = compute_metrics([_result("p1", prompts=1, tests=1)])
        assert metrics.ratio_lowest_terms == (1, 1)
        assert metrics.success_rate == 1.0

    def test_per_difficulty_means(self):
        results = [
            _result("e1", 2, difficulty="easy"),
            _result("e2", 4, difficulty="easy"),
            _result("h1", 9, difficulty="hard"),
        ]
        metrics = compute_metrics(results)
        assert metrics.per_difficulty_prompt_means == {"easy": 3.0, "hard": 9.0}

    def test_behavior_frequencies_split_by_difficulty(self):
        results = [
            _result("e1", 2, difficulty="easy", behaviors=("unique_code", "new_code_passes_prev")),
            _result("m1", 2, difficulty="medium", behaviors=("repeated_code",)),
            _result("h1", 2, difficulty="hard", behaviors=("repeated_code", "new_code_fails_prev")),
        ]
        freq = compute_metrics(results).behavior_frequencies
        assert freq["repeated_code"] == {"easy": 0, "medium": 1, "hard": 1}
        assert freq["new_code_fails_prev"] == {"easy": 0, "medium": 0, "hard": 1}
        assert freq["unique_code"]["easy"] == 1

    @given(st.permutations(list(range(12))))
    def test_success_rate_permutation_invariant(self, order):
        results = [_result(f"p{i:02d}", 3 + i, solved=(i % 3 != 0)) for i in range(12)]
        base = compute_metrics(results)
        shuffled = compute_metrics([results[i] for i in order])
        assert shuffled.success_rate == base.success_rate
        assert shuffled.ratio_lowest_terms == base.ratio_lowest_terms


# Fifteen problems arranged easy -> hard; the hard block is the last seven.
VARIANT_A = [2, 3, 4, 5, 6, 4, 5, 3, 2, 3, 4, 5, 6, 4, 4]
VARIANT_B = [4, 5, 8, 9, 10, 6, 5, 3, 5, 8, 10, 12, 15, 10, 10]

# Published per-problem prompt counts for the manual-vs-generated comparison.
FIGURE_A = [2, 1, 3, 1, 9, 1, 3, 10, 2, 1, 17, 4, 5, 4, 9]
FIGURE_B = [3, 1, 9, 2, 15, 1, 5, 11, 3, 6, 23, 9, 11, 10, 12]


def _variant_results(counts: list[int]) -> list[ProblemResult]:
    return [
        _result(
            f"p{i:02d}",
            prompts=c,
            difficulty="hard" if i >= 8 else "easy",
        )
        for i, c in enumerate(counts)
    ]


class TestCompareVariants:
    def test_exact_doubling(self):
        a = [_result(f"p{i}", 3 + i) for i in range(4)]
        b = [_result(f"p{i}", 2 * (3 + i)) for i in range(4)]
        rows = compare_variants(a, b, group_by="none")
        assert len(rows) == 1
        assert rows[0].factor == pytest.approx(2.0)

    def test_identical_sets_factor_one(self):
        a = [_result(f"p{i}", 3 + i) for i in range(4)]
        rows = compare_variants(a, a, group_by="none")
        assert rows[0].factor == pytest.approx(1.0)

    def test_id_mismatch_lists_missing(self):
        a = [_result("p1", 3)]
        b = [_result("p2", 3)]
        with pytest.raises(ComparisonError, match="p1"):
            compare_variants(a, b)

    def test_shaped_fixture_overall_2x_hard_2_5x(self):
        rows = compare_variants(
            _variant_results(VARIANT_A), _variant_results(VARIANT_B), group_by="difficulty"
        )
        by_group = {r.group: r for r in rows}
        assert by_group["overall"].factor == pytest.approx(2.0)
        assert by_group["hard"].factor == pytest.approx(2.5)

    def test_published_counts_frozen_factors(self):
        # frozen from exact fractions: overall 121/72, hard 74/42, easy 47/30
        rows = compare_variants(
            _variant_results(FIGURE_A), _variant_results(FIGURE_B), group_by="difficulty"
        )
        by_group = {r.group: r for r in rows}
        assert by_group["overall"].factor == pytest.approx(float(Fraction(121, 72)))
        assert by_group["hard"].factor == pytest.approx(float(Fraction(74, 42)))
        assert by_group["easy"].factor == pytest.approx(float(Fraction(47, 30)))

    def test_io_datatype_grouping(self):
        a = [
            _result("p1", 4, input_datatypes=("string",), output_datatype="bool"),
            _result("p2", 5, input_datatypes=("int",), output_datatype="int"),
        ]
        b = [
            _result("p1", 8, input_datatypes=("string",), output_datatype="bool"),
            _result("p2", 5, input_datatypes=("int",), output_datatype="int"),
        ]
        rows = compare_variants(a, b, group_by="io_datatypes")
        groups = {r.group: r.factor for r in rows}
        assert groups["string->bool"] == pytest.approx(2.0)
        assert groups["int->int"] == pytest.approx(1.0)


class TestRunBench:
    def _corpus(self, corpus_root, n=3):
        for i in range(1, n + 1):
            name = f"code{i}"
            write_problem(
                corpus_root,
                f"lc{i:04d}",
                f"{name}(x, y)",
                (
                    f"def test_add_positives():\n    assert {name}(2, 3) == 5\n\n"
                    f"def test_add_mixed():\n    assert {name}(-2, 3) == 1\n"
                ),
            )
        return load_corpus(corpus_root)

    def _factory(self, good_ids=None):
        def factory(manifest, session_id):
            if good_ids is not None and manifest.id not in good_ids:
                return scripted_session([], session_id)  # exhausts on first send
            name = manifest.sanitized_name
            return scripted_session(
                [ADD_RETURN_5.replace("code1", name), ADD_RETURN_SUM.replace("code1", name)],
                session_id,
            )

        return factory

    def test_all_solved(self, corpus_root, tmp_path):
        corpus = self._corpus(corpus_root)
        results = run_bench(
            corpus, self._factory(), tmp_path, adapter=default_adapter(per_run_timeout=20.0)
        )
        assert len(results) == 3
        assert all(r.solved for r in results)
        assert all(r.n_prompts == 2 and r.n_tests == 2 for r in results)

    def test_provider_error_isolated(self, corpus_root, tmp_path):
        corpus = self._corpus(corpus_root)
        good = {"lc0001", "lc0003"}
        results = run_bench(
            corpus,
            self._factory(good_ids=good),
            tmp_path,
            adapter=default_adapter(per_run_timeout=20.0),
        )
        by_id = {r.problem_id: r for r in results}
        assert by_id["lc0002"].stop_reason == "provider_error"
        assert not by_id["lc0002"].solved
        assert by_id["lc0001"].solved and by_id["lc0003"].solved

    def test_rerun_from_journals_identical(self, corpus_root, tmp_path):
        corpus = self._corpus(corpus_root)
        live = run_bench(
            corpus, self._factory(), tmp_path, adapter=default_adapter(per_run_timeout=20.0)
        )
        recomputed = results_from_journal_dir(tmp_path)
        assert recomputed == live

    def test_parallel_bench(self, corpus_root, tmp_path):
        corpus = self._corpus(corpus_root, n=4)
        results = run_bench(
            corpus,
            self._factory(),
            tmp_path,
            parallelism=4,
            adapter=default_adapter(per_run_timeout=20.0),
        )
        assert len(results) == 4
        assert all(r.solved for r in results)

    def test_behavior_flags_from_journaled_outcomes(self, corpus_root, tmp_path):
        name = "code9"
        write_problem(
            corpus_root,
            "lc0009",
            f"{name}(x, y)",
            (
                f"def test_pair_sum():\n    assert {name}(2, 3) == 5\n\n"
                f"def test_zeros():\n    assert {name}(0, 0) == 0\n"
            ),
        )
        corpus = load_corpus(corpus_root)
        responses = [
            f"```python\ndef {name}(x, y):\n    return 5\n```",
            f"```python\ndef {name}(x, y):\n    return x * y\n```",  # regresses test_pair_sum
            f"```python\ndef {name}(x, y):\n    return x + y\n```",
        ]
        results = run_bench(
            corpus,
            lambda m, s: scripted_session(responses, s),
            tmp_path,
            adapter=default_adapter(per_run_timeout=20.0),
        )
        behaviors = set(results[0].behaviors)
        assert "new_code_fails_prev" in behaviors
        assert "unique_code" in behaviors and "repeated_code" not in behaviors
        assert "new_code_passes_prev" in behaviors  # the final fix kept the older test green


class TestFileExports:
    def test_round_trip_files(self, tmp_path):
        results = [_result("p1", 4), _result("p2", 6, solved=False)]
        write_results(results, tmp_path / "results.json")
        assert read_results(tmp_path / "results.json") == results
        metrics = compute_metrics(results)
        write_metrics(metrics, tmp_path / "metrics.json")
        assert (tmp_path / "metrics.json").read_text().startswith("{")
        rows = compare_variants(results, results)
        write_comparison(rows, tmp_path / "comparison.csv")
        lines = (tmp_path / "comparison.csv").read_text().splitlines()
        assert lines[0] == "group,mean_a,mean_b,factor"
        assert lines[1].startswith("all,5,5,1")
        assert isinstance(metrics, AggregateMetrics)

"""Split protocol, abuse-class metrics, score correlation and reports."""

from __future__ import annotations

import json

import numpy as np
import pytest

from convabuse.content import default_lexicon_path, load_lexicon
from convabuse.corpus import SynthParams, build_balanced_dataset, generate_synthetic
from convabuse.errors import DatasetBalanceError
from convabuse.evaluation import (
    EvalReport,
    RunResult,
    abuse_prf,
    evaluate,
    make_splits,
    pipeline_runner,
    report_to_json,
    score_correlation,
    write_report,
    write_timings,
)
from convabuse.features import ContextParams, FeatureStore, build_store
from convabuse.fusion import PipelineConfig

CTX = ContextParams(before_count=15, after_count=15, window_len=5)


@pytest.fixture(scope="module")
def store():
    lexicon = load_lexicon(default_lexicon_path())
    params = SynthParams(
        n_threads=6, messages_per_thread=30, abuse_rate=0.15, seed=3
    )
    corpus = generate_synthetic(params, lexicon)
    dataset = build_balanced_dataset(corpus, seed=1)
    return build_store(corpus, dataset, CTX, lexicon)


def toy_store(n_pos=15, n_neg=15, seed=0):
    """Store with synthetic matrices only; good enough for injected runners."""
    rng = np.random.default_rng(seed)
    n = n_pos + n_neg
    labels = np.array([1] * n_pos + [-1] * n_neg)
    return FeatureStore(
        ids=[f"m{i}" for i in range(n)],
        labels=labels,
        texts=["x"] * n,
        raw_tokens=[["x"]] * n,
        collapsed_tokens=[["x"]] * n,
        content_static=rng.normal(size=(n, 24)),
        graph=rng.normal(size=(n, 4)),
        graph_names=["g1", "g2", "g3", "g4"],
    )


class TestMakeSplits:
    def test_protocol_sizes(self):
        labels = np.array([1] * 655 + [-1] * 655)
        plan = make_splits(labels, seed=42)
        assert len(plan.splits) == 10
        for train, test in plan.splits:
            assert len(train) == 917
            assert len(test) == 393
            assert (labels[train] > 0).sum() == 458
            assert (labels[test] > 0).sum() == 197
            assert (labels[test] <= 0).sum() == 196

    def test_partition_and_sorting(self):
        labels = np.array([1] * 20 + [-1] * 25)
        plan = make_splits(labels, seed=5, repetitions=3)
        for train, test in plan.splits:
            assert np.array_equal(train, np.sort(train))
            assert np.array_equal(test, np.sort(test))
            assert len(np.intersect1d(train, test)) == 0
            assert len(train) + len(test) == len(labels)

    def test_same_seed_same_plan(self):
        labels = np.array([1] * 12 + [-1] * 13)
        a = make_splits(labels, seed=9, repetitions=4)
        b = make_splits(labels, seed=9, repetitions=4)
        for (t1, s1), (t2, s2) in zip(a.splits, b.splits):
            assert np.array_equal(t1, t2) and np.array_equal(s1, s2)

    def test_different_seeds_differ(self):
        labels = np.array([1] * 30 + [-1] * 30)
        a = make_splits(labels, seed=1, repetitions=1)
        b = make_splits(labels, seed=2, repetitions=1)
        assert not np.array_equal(a.splits[0][0], b.splits[0][0])

    def test_repetitions_are_independent_draws(self):
        labels = np.array([1] * 30 + [-1] * 30)
        plan = make_splits(labels, seed=3, repetitions=2)
        assert not np.array_equal(plan.splits[0][0], plan.splits[1][0])

    def test_too_small_class_rejected(self):
        with pytest.raises(DatasetBalanceError):
            make_splits(np.array([1] * 9 + [-1] * 50), seed=0)
        with pytest.raises(DatasetBalanceError):
            make_splits(np.array([1] * 50 + [-1] * 9), seed=0)


class TestAbusePrf:
    def test_perfect_predictor(self):
        y = np.array([1, 1, -1, -1])
        p, r, f = abuse_prf(y, np.array([0.9, 0.8, 0.1, 0.2]))
        assert (p, r, f) == (1.0, 1.0, 1.0)

    def test_constant_positive_on_balanced(self):
        y = np.array([1] * 10 + [-1] * 10)
        p, r, f = abuse_prf(y, np.full(20, 0.99))
        assert p == pytest.approx(0.5)
        assert r == 1.0
        assert f == pytest.approx(2 / 3)

    def test_never_fires(self):
        y = np.array([1, -1])
        assert abuse_prf(y, np.array([0.1, 0.1])) == (0.0, 0.0, 0.0)

    def test_threshold_is_inclusive(self):
        y = np.array([1])
        p, r, f = abuse_prf(y, np.array([0.5]))
        assert r == 1.0


class TestScoreCorrelation:
    def test_identical_vectors(self):
        x = np.array([0.1, 0.5, 0.9, 0.3])
        assert score_correlation(x, x) == pytest.approx(1.0)

    def test_anticorrelated(self):
        x = np.array([0.1, 0.5, 0.9, 0.3])
        assert score_correlation(x, -x) == pytest.approx(-1.0)

    def test_known_population_correlation(self):
        rng = np.random.default_rng(11)
        n = 10_000
        x = rng.normal(size=n)
        y = 0.5 * x + np.sqrt(1 - 0.25) * rng.normal(size=n)
        assert 0.45 < score_correlation(x, y) < 0.55

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            score_correlation(np.zeros(3), np.zeros(4))

    def test_zero_variance(self):
        with pytest.raises(ValueError):
            score_correlation(np.ones(5), np.arange(5.0))


class TestEvaluate:
    def test_oracle_runner_scores_one(self):
        st = toy_store()
        plan = make_splits(st.labels, seed=0, repetitions=3)

        def oracle(store, train_rows, test_rows):
            probs = np.where(store.labels[test_rows] > 0, 0.9, 0.1)
            return RunResult(probs=probs, feature_count=7)

        report, timings = evaluate(st, plan, "content", oracle)
        assert report.mean_precision == 1.0
        assert report.mean_recall == 1.0
        assert report.mean_f == 1.0
        assert report.std_f == 0.0
        assert report.feature_count == 7
        assert report.mean_score_correlation is None
        assert timings.total_s >= 0.0

    def test_constant_runner_on_balanced_data(self):
        st = toy_store(20, 20)
        plan = make_splits(st.labels, seed=1, repetitions=2)

        def constant(store, train_rows, test_rows):
            return RunResult(probs=np.full(len(test_rows), 0.7), feature_count=1)

        report, _ = evaluate(st, plan, "content", constant)
        assert report.mean_recall == 1.0
        assert 0.4 < report.mean_precision < 0.6
        assert report.mean_f == pytest.approx(
            2 * report.mean_precision / (report.mean_precision + 1.0), abs=0.02
        )

    def test_correlation_collected_from_base_probs(self):
        st = toy_store()
        plan = make_splits(st.labels, seed=2, repetitions=2)
        rng = np.random.default_rng(3)

        def with_bases(store, train_rows, test_rows):
            k = len(test_rows)
            c = rng.uniform(size=k)
            return RunResult(
                probs=np.full(k, 0.6),
                feature_count=2,
                content_probs=c,
                graph_probs=1.0 - c,
            )

        report, _ = evaluate(st, plan, "late", with_bases)
        assert report.mean_score_correlation == pytest.approx(-1.0)
        assert all("score_correlation" in rep for rep in report.repetitions)

    def test_timing_split_and_per_message(self):
        st = toy_store()
        plan = make_splits(st.labels, seed=4, repetitions=2)

        def timed(store, train_rows, test_rows):
            return RunResult(
                probs=np.full(len(test_rows), 0.6),
                feature_count=1,
                train_s=0.25,
                score_s=0.05,
            )

        _, timings = evaluate(st, plan, "content", timed)
        assert timings.train_s == pytest.approx(0.5)
        assert timings.score_s == pytest.approx(0.1)
        scored = sum(len(t) for _, t in plan.splits)
        assert timings.per_message_score_s == pytest.approx(0.1 / scored)


class TestRealRunnerDeterminism:
    def test_report_bytes_identical_across_runs(self, store):
        plan = make_splits(store.labels, seed=0, repetitions=2)
        runner = pipeline_runner("content", CTX, PipelineConfig(folds=3))
        r1, t1 = evaluate(store, plan, "content", runner)
        r2, t2 = evaluate(store, plan, "content", runner)
        assert report_to_json(r1) == report_to_json(r2)
        # wall clock stays out of the report and in the timing channel
        assert t1.total_s != t2.total_s or t1.total_s >= 0.0

    def test_late_kind_reports_correlation(self, store):
        plan = make_splits(store.labels, seed=0, repetitions=1)
        runner = pipeline_runner("late", CTX, PipelineConfig(folds=3))
        report, _ = evaluate(store, plan, "late", runner)
        assert report.mean_score_correlation is not None
        assert -1.0 <= report.mean_score_correlation <= 1.0


class TestReportJson:
    def make_report(self):
        return EvalReport(
            kind="content",
            seed=4,
            repetitions=[{"precision": 1.0, "recall": 0.5, "f_measure": 2 / 3}],
            mean_precision=1.0,
            mean_recall=0.5,
            mean_f=2 / 3,
            std_precision=0.0,
            std_recall=0.0,
            std_f=0.0,
            feature_count=29,
            mean_score_correlation=None,
            skipped_messages=0,
        )

    def test_sorted_keys_and_extra(self):
        text = report_to_json(self.make_report(), extra={"config": {"seed": 4}})
        obj = json.loads(text)
        assert obj["config"] == {"seed": 4}
        assert list(obj) == sorted(obj)
        assert "total_s" not in text

    def test_write_report_and_timings(self, tmp_path, store):
        plan = make_splits(store.labels, seed=0, repetitions=1)
        runner = pipeline_runner("content", CTX, PipelineConfig(folds=3))
        report, timings = evaluate(store, plan, "content", runner)
        rp = tmp_path / "report.json"
        tp = tmp_path / "timings.json"
        write_report(report, str(rp))
        write_timings(timings, str(tp))
        robj = json.loads(rp.read_text())
        tobj = json.loads(tp.read_text())
        assert robj["kind"] == "content"
        assert set(tobj) == {"total_s", "train_s", "score_s", "per_message_score_s"}

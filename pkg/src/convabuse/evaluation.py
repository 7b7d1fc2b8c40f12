"""Repeated stratified 70/30 evaluation with abuse-class precision/recall/F.

The protocol is 10 independent seeded splits, each stratified to keep the
class ratio: train takes floor(0.7 * n_abuse) abuse rows and enough
non-abuse rows to reach floor(0.7 * n) total; everything else is test.
Wall-clock numbers are kept out of the report object so reports are
byte-identical across reruns; timings travel separately.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .errors import DatasetBalanceError
from .features import ContextParams, FeatureStore
from .fusion import (
    KIND_HYBRID,
    KIND_LATE,
    PipelineConfig,
    base_probability_rows,
    predict_rows,
    train_pipeline,
)
from .graphmetrics import GraphMetricsConfig


@dataclass(frozen=True)
class SplitPlan:
    seed: int
    splits: tuple  # of (train_rows, test_rows) index-array pairs


def make_splits(
    labels: np.ndarray,
    seed: int,
    repetitions: int = 10,
    train_frac: float = 0.7,
) -> SplitPlan:
    """Independent seeded stratified splits over rows labeled +1/-1."""
    y = np.asarray(labels)
    pos = np.where(y > 0)[0]
    neg = np.where(y <= 0)[0]
    if len(pos) < 10 or len(neg) < 10:
        raise DatasetBalanceError("need at least 10 rows per class to evaluate")
    n = len(y)
    # exact decimal arithmetic: floor(0.7 * 1310) must be 917, not the
    # 916 that binary-float 0.7 would produce
    frac = Fraction(str(train_frac))
    train_pos = int(frac * len(pos))
    train_total = int(frac * n)
    train_neg = train_total - train_pos
    if train_neg <= 0 or train_neg >= len(neg):
        raise DatasetBalanceError("degenerate split sizes; check class balance")
    rng = np.random.default_rng(seed)
    splits = []
    for _ in range(repetitions):
        p = rng.permutation(pos)
        q = rng.permutation(neg)
        train = np.sort(np.concatenate([p[:train_pos], q[:train_neg]]))
        test = np.sort(np.concatenate([p[train_pos:], q[train_neg:]]))
        splits.append((train, test))
    return SplitPlan(seed=seed, splits=tuple(splits))


def abuse_prf(labels: np.ndarray, probs: np.ndarray, threshold: float = 0.5):
    """Precision, recall, F for the abuse (+1) class at the given threshold."""
    y = np.asarray(labels)
    pred = np.asarray(probs) >= threshold
    tp = int(((y > 0) & pred).sum())
    fp = int(((y <= 0) & pred).sum())
    fn = int(((y > 0) & ~pred).sum())
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f


def score_correlation(x, y) -> float:
    """Pearson correlation of two aligned score vectors."""
    xv = np.asarray(x, dtype=float)
    yv = np.asarray(y, dtype=float)
    if xv.shape != yv.shape:
        raise ValueError("score vectors differ in length")
    xc = xv - xv.mean()
    yc = yv - yv.mean()
    vx = float(np.dot(xc, xc))
    vy = float(np.dot(yc, yc))
    if vx == 0.0 or vy == 0.0:
        raise ValueError("zero-variance score vector")
    return float(np.dot(xc, yc) / math.sqrt(vx * vy))


@dataclass
class RunResult:
    """What one train-and-score repetition hands back to the evaluator."""

    probs: np.ndarray  # abuse probabilities for the test rows
    feature_count: int
    content_probs: np.ndarray | None = None  # base scores, when the kind has them
    graph_probs: np.ndarray | None = None
    train_s: float = 0.0
    score_s: float = 0.0


Runner = Callable[[FeatureStore, np.ndarray, np.ndarray], RunResult]


def pipeline_runner(
    kind: str,
    ctx_params: ContextParams,
    config: PipelineConfig = PipelineConfig(),
    graph_cfg: GraphMetricsConfig | None = None,
) -> Runner:
    """The real runner: train the pipeline on train rows, score test rows."""

    def run(store: FeatureStore, train_rows: np.ndarray, test_rows: np.ndarray):
        t0 = time.perf_counter()
        pipeline = train_pipeline(kind, store, train_rows, ctx_params, config, graph_cfg)
        t1 = time.perf_counter()
        probs = predict_rows(pipeline, store, test_rows)
        t2 = time.perf_counter()
        result = RunResult(
            probs=probs,
            feature_count=len(pipeline.manifest),
            train_s=t1 - t0,
            score_s=t2 - t1,
        )
        if kind in (KIND_LATE, KIND_HYBRID):
            result.content_probs, result.graph_probs = base_probability_rows(
                pipeline, store, test_rows
            )
        return result

    return run


@dataclass
class EvalReport:
    kind: str
    seed: int
    repetitions: list[dict]
    mean_precision: float
    mean_recall: float
    mean_f: float
    std_precision: float
    std_recall: float
    std_f: float
    feature_count: int
    mean_score_correlation: float | None
    skipped_messages: int


@dataclass
class EvalTimings:
    total_s: float
    train_s: float
    score_s: float
    per_message_score_s: float


def evaluate(
    store: FeatureStore, plan: SplitPlan, kind: str, runner: Runner
) -> tuple[EvalReport, EvalTimings]:
    """Run every split, collect abuse-class metrics and wall-clock accounting."""
    reps = []
    correlations = []
    feature_count = 0
    train_s = 0.0
    score_s = 0.0
    scored = 0
    t0 = time.perf_counter()
    for train_rows, test_rows in plan.splits:
        result = runner(store, train_rows, test_rows)
        train_s += result.train_s
        score_s += result.score_s
        precision, recall, f = abuse_prf(store.labels[test_rows], result.probs)
        feature_count = result.feature_count
        rep = {
            "precision": precision,
            "recall": recall,
            "f_measure": f,
            "train_size": int(len(train_rows)),
            "test_size": int(len(test_rows)),
        }
        if result.content_probs is not None and result.graph_probs is not None:
            try:
                corr = score_correlation(result.content_probs, result.graph_probs)
            except ValueError:
                corr = None
            if corr is not None:
                correlations.append(corr)
                rep["score_correlation"] = corr
        reps.append(rep)
        scored += len(test_rows)
    total_s = time.perf_counter() - t0

    def col(name):
        return np.array([r[name] for r in reps])

    report = EvalReport(
        kind=kind,
        seed=plan.seed,
        repetitions=reps,
        mean_precision=float(col("precision").mean()),
        mean_recall=float(col("recall").mean()),
        mean_f=float(col("f_measure").mean()),
        std_precision=float(col("precision").std(ddof=1)) if len(reps) > 1 else 0.0,
        std_recall=float(col("recall").std(ddof=1)) if len(reps) > 1 else 0.0,
        std_f=float(col("f_measure").std(ddof=1)) if len(reps) > 1 else 0.0,
        feature_count=feature_count,
        mean_score_correlation=float(np.mean(correlations)) if correlations else None,
        skipped_messages=len(store.skipped),
    )
    timings = EvalTimings(
        total_s=total_s,
        train_s=train_s,
        score_s=score_s,
        per_message_score_s=(score_s / scored) if scored else 0.0,
    )
    return report, timings


def report_to_json(report: EvalReport, extra: dict | None = None) -> str:
    obj = {
        "kind": report.kind,
        "seed": report.seed,
        "repetitions": report.repetitions,
        "mean": {
            "precision": report.mean_precision,
            "recall": report.mean_recall,
            "f_measure": report.mean_f,
        },
        "std": {
            "precision": report.std_precision,
            "recall": report.std_recall,
            "f_measure": report.std_f,
        },
        "feature_count": report.feature_count,
        "mean_score_correlation": report.mean_score_correlation,
        "skipped_messages": report.skipped_messages,
    }
    if extra:
        obj.update(extra)
    return json.dumps(obj, sort_keys=True, indent=1)


def write_report(report: EvalReport, path: str, extra: dict | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(report_to_json(report, extra))
        fh.write("\n")


def write_timings(timings: EvalTimings, path: str) -> None:
    obj = {
        "total_s": timings.total_s,
        "train_s": timings.train_s,
        "score_s": timings.score_s,
        "per_message_score_s": timings.per_message_score_s,
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(obj, sort_keys=True, indent=1))
        fh.write("\n")

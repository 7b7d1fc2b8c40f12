"""Backward feature elimination with linear-SVM weight ranking.

Each step fits the ranking model on the whole dataset (remaining columns),
measures F over the split plan, and drops the feature with the smallest
absolute weight. The evaluation at each step trains on a fixed precomputed
feature matrix with in-sample calibration; model-dependent content columns
are computed once from the full dataset, so step F-measures carry a small
optimistic bias, which is acceptable for ranking purposes.
"""

from __future__ import annotations

import io
import warnings
from dataclasses import dataclass

import numpy as np

from .content import CONTENT_MANIFEST
from .errors import FitError
from .evaluation import SplitPlan, abuse_prf
from .features import FeatureStore, content_model_matrix
from .fusion import (
    KIND_CONTENT,
    KIND_EARLY,
    KIND_GRAPH,
    KIND_HYBRID,
    LATE_MANIFEST,
    PipelineConfig,
    _crossfit,
    _fit_content_models,
)
from .learn import (
    SVMModel,
    calibrate_fit,
    calibrator_apply,
    scaler_apply,
    scaler_fit,
    svm_decision,
    svm_train,
)

RFE_KINDS = (KIND_CONTENT, KIND_GRAPH, KIND_EARLY, KIND_HYBRID)


def rank_features(model: SVMModel, manifest: list[str]) -> list[str]:
    """Manifest names by importance |w|, descending; ties keep manifest order."""
    w = np.asarray(model.w)
    if len(w) != len(manifest):
        raise ValueError("weight vector and manifest lengths differ")
    order = sorted(range(len(w)), key=lambda i: (-abs(w[i]), i))
    return [manifest[i] for i in order]


def fixed_matrix(kind: str, store: FeatureStore, config: PipelineConfig = PipelineConfig()):
    """(matrix, manifest) for ranking: full-dataset features for one kind.

    Content model columns (tf-idf, NB) are fit on the whole dataset here;
    hybrid's two score columns are out-of-fold over the whole dataset.
    """
    if kind not in RFE_KINDS:
        raise ValueError(f"elimination expects one of {RFE_KINDS}, not {kind!r}")
    rows = np.arange(len(store))
    if kind == KIND_GRAPH:
        return store.graph.copy(), list(store.graph_names)
    tfidf, nb = _fit_content_models(store, rows)
    Xc = np.hstack([store.content_static, content_model_matrix(store, tfidf, nb)])
    if kind == KIND_CONTENT:
        return Xc, list(CONTENT_MANIFEST)
    Xg = store.graph
    if kind == KIND_EARLY:
        return np.hstack([Xc, Xg]), list(CONTENT_MANIFEST) + list(store.graph_names)
    y = store.labels
    _, c_probs = _crossfit(Xc, y, config.C, config.folds)
    _, g_probs = _crossfit(Xg, y, config.C, config.folds)
    X = np.hstack([Xc, Xg, np.column_stack([c_probs, g_probs])])
    names = list(CONTENT_MANIFEST) + list(store.graph_names) + list(LATE_MANIFEST)
    return X, names


def _plan_f_measure(X: np.ndarray, y: np.ndarray, plan: SplitPlan, C: float) -> float:
    """Mean F over the plan's splits; in-sample Platt, threshold 0.5."""
    fs = []
    for train_rows, test_rows in plan.splits:
        scaler = scaler_fit(X[train_rows])
        svm = svm_train(scaler_apply(scaler, X[train_rows]), y[train_rows], C)
        cal = calibrate_fit(
            svm_decision(svm, scaler_apply(scaler, X[train_rows])), y[train_rows]
        )
        probs = calibrator_apply(cal, svm_decision(svm, scaler_apply(scaler, X[test_rows])))
        fs.append(abuse_prf(y[test_rows], probs)[2])
    return float(np.mean(fs))


@dataclass
class TraceRecord:
    removed_feature: str
    remaining_count: int
    f_measure: float


@dataclass
class EliminationTrace:
    manifest: list[str]  # initial feature names, full order
    full_f: float  # F with every feature, measured before any removal
    records: list[TraceRecord]

    def remaining_after(self, step: int) -> list[str]:
        """Feature names still in play after the given 1-based step."""
        removed = {r.removed_feature for r in self.records[:step]}
        return [name for name in self.manifest if name not in removed]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("step,removed_feature,remaining_count,f_measure\n")
        for i, r in enumerate(self.records, start=1):
            buf.write(f"{i},{r.removed_feature},{r.remaining_count},{r.f_measure:.17g}\n")
        return buf.getvalue()


def rfe(
    X: np.ndarray,
    y: np.ndarray,
    manifest: list[str],
    plan: SplitPlan,
    C: float = 1.0,
) -> EliminationTrace:
    """Eliminate one lowest-|w| feature per step until a single one remains."""
    X = np.asarray(X, dtype=float)
    if X.shape[1] != len(manifest):
        raise ValueError("matrix width and manifest length differ")
    if X.shape[1] < 2:
        raise FitError("nothing to eliminate with fewer than 2 features")
    cols = list(range(X.shape[1]))
    full_f = _plan_f_measure(X, y, plan, C)
    records: list[TraceRecord] = []
    while len(cols) > 1:
        sub = X[:, cols]
        scaler = scaler_fit(sub)
        svm = svm_train(scaler_apply(scaler, sub), y, C)
        w = np.abs(svm.w)
        # among minimal |w| drop the latest manifest position
        drop_pos = sorted(range(len(cols)), key=lambda i: (w[i], -cols[i]))[0]
        removed = manifest[cols[drop_pos]]
        del cols[drop_pos]
        f = _plan_f_measure(X[:, cols], y, plan, C)
        records.append(
            TraceRecord(
                removed_feature=removed, remaining_count=len(cols), f_measure=f
            )
        )
    return EliminationTrace(manifest=list(manifest), full_f=full_f, records=records)


def top_features(
    trace: EliminationTrace, full_f: float, threshold: float = 0.97
) -> list[str]:
    """Smallest surviving set in the trace with F >= threshold * full_f."""
    target = threshold * full_f
    best = None
    for step, record in enumerate(trace.records, start=1):
        if record.f_measure >= target:
            best = step
    if best is None:
        warnings.warn("no elimination step reaches the threshold; keeping all features")
        return list(trace.manifest)
    return trace.remaining_after(best)


def late_top_features(content_tf: list[str], graph_tf: list[str]) -> dict:
    """Late fusion consumes both bases' scores, so its TF is their union."""
    return {"content": list(content_tf), "graph": list(graph_tf)}

"""The five classification pipelines and their leak-free training.

Kinds: content (29 text features), graph (the full graph manifest), early
(both feature sets concatenated), late (a meta classifier over the two base
probabilities), hybrid (raw features plus the two base scores).

Training statistics (tf-idf tables, NB tables, scaler moments, calibration)
always come from training rows only. Probability meta-features for late and
hybrid training are produced out-of-fold by internal 5-fold cross-fitting;
the base models used at scoring time are refit on the whole training set,
with their calibrators fit on the collected out-of-fold decisions.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .content import (
    CONTENT_MANIFEST,
    TfIdfModel,
    model_features,
    static_features,
    tfidf_fit,
)
from .convgraph import extract_modes
from .corpus import ABUSE, NON_ABUSE, Corpus, thread_context
from .errors import FitError, ManifestMismatchError
from .features import ContextParams, FeatureStore, content_model_matrix
from .graphmetrics import GraphMetricsConfig, compute_feature_vector, feature_manifest
from .learn import (
    Calibrator,
    NBModel,
    Scaler,
    SVMModel,
    calibrate_fit,
    calibrator_apply,
    nb_train,
    scaler_apply,
    scaler_fit,
    svm_decision,
    svm_train,
)

KIND_CONTENT = "content"
KIND_GRAPH = "graph"
KIND_EARLY = "early"
KIND_LATE = "late"
KIND_HYBRID = "hybrid"
KINDS = (KIND_CONTENT, KIND_GRAPH, KIND_EARLY, KIND_LATE, KIND_HYBRID)

CAL_OOF = "oof"
CAL_INSAMPLE = "insample"

BUNDLE_SCHEMA = "convabuse-bundle-v1"

LATE_MANIFEST = ["content_score", "graph_score"]


@dataclass(frozen=True)
class PipelineConfig:
    C: float = 1.0
    calibration: str = CAL_OOF  # "oof" or the in-sample ablation mode
    folds: int = 5
    content_columns: tuple[int, ...] | None = None  # optional feature subsets
    graph_columns: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.calibration not in (CAL_OOF, CAL_INSAMPLE):
            raise ValueError(f"unknown calibration mode {self.calibration!r}")
        if self.folds < 2:
            raise ValueError("folds must be at least 2")


@dataclass
class Head:
    """scaler -> linear SVM -> Platt sigmoid"""

    scaler: Scaler
    svm: SVMModel
    calibrator: Calibrator


def head_decision(head: Head, X: np.ndarray) -> np.ndarray:
    return svm_decision(head.svm, scaler_apply(head.scaler, X))

def head_proba(head: Head, X: np.ndarray):
    return calibrator_apply(head.calibrator, head_decision(head, X))


def deterministic_folds(y: np.ndarray, k: int):
    """Stratified fold assignment with no RNG: round-robin over the
    class-sorted index order."""
    n = len(y)
    order = np.concatenate([np.where(y > 0)[0], np.where(y <= 0)[0]])
    fold_of = np.empty(n, dtype=int)
    for pos, idx in enumerate(order):
        fold_of[idx] = pos % k
    for f in range(k):
        yield np.where(fold_of != f)[0], np.where(fold_of == f)[0]


def _crossfit(X: np.ndarray, y: np.ndarray, C: float, folds: int):
    """Out-of-fold decisions and probabilities from per-fold inner heads.

    Inner calibrators are fit in-sample on their own fold's training
    decisions; the returned decision values feed the refit base calibrator.
    """
    n = len(y)
    if n < 2 * folds:
        raise FitError(f"need at least {2 * folds} rows for {folds}-fold cross-fitting")
    decs = np.empty(n)
    probs = np.empty(n)
    for tr, va in deterministic_folds(y, folds):
        scaler = scaler_fit(X[tr])
        svm = svm_train(scaler_apply(scaler, X[tr]), y[tr], C)
        cal = calibrate_fit(svm_decision(svm, scaler_apply(scaler, X[tr])), y[tr])
        d_va = svm_decision(svm, scaler_apply(scaler, X[va]))
        decs[va] = d_va
        probs[va] = calibrator_apply(cal, d_va)
    return decs, probs


def fit_head(
    X: np.ndarray, y: np.ndarray, C: float, calibration: str, folds: int
) -> tuple[Head, np.ndarray]:
    """Fit scaler+SVM on all rows; calibrate per the requested mode.

    Returns the head and the per-row probabilities used as stacking
    meta-features (out-of-fold ones under "oof", in-sample otherwise).
    """
    scaler = scaler_fit(X)
    Xs = scaler_apply(scaler, X)
    svm = svm_train(Xs, y, C)
    if calibration == CAL_INSAMPLE:
        decs = svm_decision(svm, Xs)
        cal = calibrate_fit(decs, y)
        head = Head(scaler, svm, cal)
        return head, np.asarray(head_proba(head, X))
    decs, probs = _crossfit(X, y, C, folds)
    return Head(scaler, svm, calibrate_fit(decs, y)), probs


@dataclass
class TrainedPipeline:
    kind: str
    context_params: ContextParams
    graph_cfg: GraphMetricsConfig
    config: PipelineConfig
    lexicon: set[str]
    manifest: list[str]  # names of the features the final SVM consumes
    graph_manifest: list[str]  # full graph manifest at fit time
    head: Head  # final head (the meta head for late)
    tfidf: TfIdfModel | None = None
    nb: NBModel | None = None
    content_head: Head | None = None  # base heads for late/hybrid scoring
    graph_head: Head | None = None


def _fit_content_models(store: FeatureStore, rows: np.ndarray):
    labels = [ABUSE if store.labels[i] > 0 else NON_ABUSE for i in rows]
    tfidf = tfidf_fit([store.raw_tokens[i] for i in rows], labels)
    nb = nb_train([store.raw_tokens[i] for i in rows], store.labels[rows])
    return tfidf, nb


def _content_matrix(store, rows, tfidf, nb, columns):
    X = np.hstack(
        [store.content_static[rows], content_model_matrix(store, tfidf, nb, rows)]
    )
    return X if columns is None else X[:, list(columns)]


def _graph_matrix(store, rows, columns):
    X = store.graph[rows]
    return X if columns is None else X[:, list(columns)]


def _subset(names: list[str], columns) -> list[str]:
    return list(names) if columns is None else [names[i] for i in columns]


def train_pipeline(
    kind: str,
    store: FeatureStore,
    rows,
    ctx_params: ContextParams,
    config: PipelineConfig = PipelineConfig(),
    graph_cfg: GraphMetricsConfig | None = None,
) -> TrainedPipeline:
    """Train one pipeline kind on the given training rows of the store."""
    if kind not in KINDS:
        raise ValueError(f"unknown pipeline kind {kind!r}")
    graph_cfg = graph_cfg or GraphMetricsConfig()
    rows = np.asarray(rows, dtype=int)
    y = store.labels[rows]
    cc, gc = config.content_columns, config.graph_columns
    content_names = _subset(CONTENT_MANIFEST, cc)
    graph_names = _subset(store.graph_names, gc)

    tfidf = nb = None
    if kind != KIND_GRAPH:
        tfidf, nb = _fit_content_models(store, rows)

    result = TrainedPipeline(
        kind=kind,
        context_params=ctx_params,
        graph_cfg=graph_cfg,
        config=config,
        lexicon=set(store.lexicon),
        manifest=[],
        graph_manifest=list(store.graph_names),
        head=None,  # filled below
        tfidf=tfidf,
        nb=nb,
    )

    if kind == KIND_CONTENT:
        X = _content_matrix(store, rows, tfidf, nb, cc)
        result.head, _ = fit_head(X, y, config.C, config.calibration, config.folds)
        result.manifest = content_names
    elif kind == KIND_GRAPH:
        X = _graph_matrix(store, rows, gc)
        result.head, _ = fit_head(X, y, config.C, config.calibration, config.folds)
        result.manifest = graph_names
    elif kind == KIND_EARLY:
        X = np.hstack(
            [_content_matrix(store, rows, tfidf, nb, cc), _graph_matrix(store, rows, gc)]
        )
        result.head, _ = fit_head(X, y, config.C, config.calibration, config.folds)
        result.manifest = content_names + graph_names
    else:  # late and hybrid both need the two base scores
        Xc = _content_matrix(store, rows, tfidf, nb, cc)
        Xg = _graph_matrix(store, rows, gc)
        result.content_head, c_probs = fit_head(
            Xc, y, config.C, config.calibration, config.folds
        )
        result.graph_head, g_probs = fit_head(
            Xg, y, config.C, config.calibration, config.folds
        )
        scores = np.column_stack([c_probs, g_probs])
        if kind == KIND_LATE:
            result.head, _ = fit_head(
                scores, y, config.C, config.calibration, config.folds
            )
            result.manifest = list(LATE_MANIFEST)
        else:
            X = np.hstack([Xc, Xg, scores])
            result.head, _ = fit_head(X, y, config.C, config.calibration, config.folds)
            result.manifest = content_names + graph_names + list(LATE_MANIFEST)
    return result


# ---- scoring ----


def _pipeline_matrix(pipeline: TrainedPipeline, store: FeatureStore, rows) -> np.ndarray:
    """Raw input matrix for the pipeline's final head, kind-dependent."""
    rows = np.asarray(rows, dtype=int)
    cfg = pipeline.config
    k = pipeline.kind
    if k == KIND_GRAPH:
        return _graph_matrix(store, rows, cfg.graph_columns)
    Xc = _content_matrix(store, rows, pipeline.tfidf, pipeline.nb, cfg.content_columns)
    if k == KIND_CONTENT:
        return Xc
    Xg = _graph_matrix(store, rows, cfg.graph_columns)
    if k == KIND_EARLY:
        return np.hstack([Xc, Xg])
    c_p = np.asarray(head_proba(pipeline.content_head, Xc))
    g_p = np.asarray(head_proba(pipeline.graph_head, Xg))
    scores = np.column_stack([c_p, g_p])
    if k == KIND_LATE:
        return scores
    return np.hstack([Xc, Xg, scores])


def predict_rows(pipeline: TrainedPipeline, store: FeatureStore, rows) -> np.ndarray:
    """Abuse probabilities for store rows (batch scoring path)."""
    if store.graph_names != pipeline.graph_manifest:
        raise ManifestMismatchError("store manifest differs from the trained bundle")
    return np.asarray(head_proba(pipeline.head, _pipeline_matrix(pipeline, store, rows)))


def base_probability_rows(
    pipeline: TrainedPipeline, store: FeatureStore, rows
) -> tuple[np.ndarray, np.ndarray]:
    """Content and graph base probabilities (late/hybrid pipelines only)."""
    if pipeline.content_head is None or pipeline.graph_head is None:
        raise ValueError("pipeline has no base heads")
    rows = np.asarray(rows, dtype=int)
    cfg = pipeline.config
    Xc = _content_matrix(store, rows, pipeline.tfidf, pipeline.nb, cfg.content_columns)
    Xg = _graph_matrix(store, rows, cfg.graph_columns)
    return (
        np.asarray(head_proba(pipeline.content_head, Xc)),
        np.asarray(head_proba(pipeline.graph_head, Xg)),
    )


def score(
    pipeline: TrainedPipeline, corpus: Corpus, message_id: str
) -> tuple[float, str]:
    """(abuse probability, label at threshold 0.5) for one corpus message."""
    current = feature_manifest(pipeline.graph_cfg)
    if current != pipeline.graph_manifest:
        raise ManifestMismatchError(
            "installed graph manifest differs from the one this bundle was trained on"
        )
    ctx = thread_context(
        corpus,
        message_id,
        pipeline.context_params.before_count,
        pipeline.context_params.after_count,
    )
    cfg = pipeline.config
    k = pipeline.kind

    def content_row():
        vec = np.concatenate(
            [
                static_features(ctx.target.text, pipeline.lexicon),
                model_features(ctx.target.text, pipeline.tfidf, pipeline.nb),
            ]
        )
        return vec if cfg.content_columns is None else vec[list(cfg.content_columns)]

    def graph_row():
        before, after, full = extract_modes(ctx, pipeline.context_params.window_len)
        vec = compute_feature_vector(
            before, after, full, ctx.target.author_id, pipeline.graph_cfg
        ).values
        return vec if cfg.graph_columns is None else vec[list(cfg.graph_columns)]

    if k == KIND_CONTENT:
        x = content_row()
    elif k == KIND_GRAPH:
        x = graph_row()
    elif k == KIND_EARLY:
        x = np.concatenate([content_row(), graph_row()])
    else:
        xc, xg = content_row(), graph_row()
        c_p = float(head_proba(pipeline.content_head, xc[None, :])[0])
        g_p = float(head_proba(pipeline.graph_head, xg[None, :])[0])
        if k == KIND_LATE:
            x = np.array([c_p, g_p])
        else:
            x = np.concatenate([xc, xg, [c_p, g_p]])
    prob = float(head_proba(pipeline.head, x[None, :])[0])
    return prob, (ABUSE if prob >= 0.5 else NON_ABUSE)


# ---- JSON bundles ----


def _head_to_json(head: Head | None):
    if head is None:
        return None
    return {
        "scaler_mean": head.scaler.mean.tolist(),
        "scaler_std": head.scaler.std.tolist(),
        "w": head.svm.w.tolist(),
        "b": head.svm.b,
        "C": head.svm.C,
        "A": head.calibrator.A,
        "B": head.calibrator.B,
    }


def _head_from_json(obj) -> Head | None:
    if obj is None:
        return None
    svm = SVMModel(
        w=np.array(obj["w"]),
        b=obj["b"],
        C=obj["C"],
        alpha=np.zeros(0),
        iterations=0,
        gap=0.0,
    )
    return Head(
        Scaler(np.array(obj["scaler_mean"]), np.array(obj["scaler_std"])),
        svm,
        Calibrator(obj["A"], obj["B"]),
    )


def manifest_sha256(names: list[str]) -> str:
    return hashlib.sha256("\n".join(names).encode("utf-8")).hexdigest()


def pipeline_to_json(pipeline: TrainedPipeline) -> str:
    """Deterministic JSON text for the trained-pipeline bundle."""
    p = pipeline
    nb = None
    if p.nb is not None:
        vocab_in_order = [None] * len(p.nb.vocab)
        for tok, i in p.nb.vocab.items():
            vocab_in_order[i] = tok
        nb = {
            "vocab": vocab_in_order,
            "log_prior_pos": p.nb.log_prior_pos,
            "log_prior_neg": p.nb.log_prior_neg,
            "log_theta_pos": p.nb.log_theta_pos.tolist(),
            "log_theta_neg": p.nb.log_theta_neg.tolist(),
            "log_absent_pos": p.nb.log_absent_pos.tolist(),
            "log_absent_neg": p.nb.log_absent_neg.tolist(),
        }
    tfidf = None
    if p.tfidf is not None:
        tfidf = {"doc_counts": p.tfidf.doc_counts, "df": p.tfidf.df}
    obj = {
        "schema": BUNDLE_SCHEMA,
        "kind": p.kind,
        "context": {
            "before_count": p.context_params.before_count,
            "after_count": p.context_params.after_count,
            "window_len": p.context_params.window_len,
        },
        "graph_cfg": {
            "damping": p.graph_cfg.damping,
            "pagerank_tol": p.graph_cfg.pagerank_tol,
            "pagerank_max_iter": p.graph_cfg.pagerank_max_iter,
            "hits_tol": p.graph_cfg.hits_tol,
            "hits_max_iter": p.graph_cfg.hits_max_iter,
        },
        "config": {
            "C": p.config.C,
            "calibration": p.config.calibration,
            "folds": p.config.folds,
            "content_columns": list(p.config.content_columns)
            if p.config.content_columns is not None
            else None,
            "graph_columns": list(p.config.graph_columns)
            if p.config.graph_columns is not None
            else None,
        },
        "lexicon": sorted(p.lexicon),
        "manifest": p.manifest,
        "graph_manifest": p.graph_manifest,
        "graph_manifest_sha256": manifest_sha256(p.graph_manifest),
        "tfidf": tfidf,
        "nb": nb,
        "head": _head_to_json(p.head),
        "content_head": _head_to_json(p.content_head),
        "graph_head": _head_to_json(p.graph_head),
    }
    return json.dumps(obj, sort_keys=True, indent=1)


def save_pipeline(pipeline: TrainedPipeline, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(pipeline_to_json(pipeline))
        fh.write("\n")


def pipeline_from_json(text: str) -> TrainedPipeline:
    obj = json.loads(text)
    if obj.get("schema") != BUNDLE_SCHEMA:
        raise ManifestMismatchError(f"unsupported bundle schema {obj.get('schema')!r}")
    if obj["graph_manifest_sha256"] != manifest_sha256(obj["graph_manifest"]):
        raise ManifestMismatchError("bundle manifest hash does not match its contents")
    nb = None
    if obj["nb"] is not None:
        o = obj["nb"]
        nb = NBModel(
            vocab={tok: i for i, tok in enumerate(o["vocab"])},
            log_prior_pos=o["log_prior_pos"],
            log_prior_neg=o["log_prior_neg"],
            log_theta_pos=np.array(o["log_theta_pos"]),
            log_theta_neg=np.array(o["log_theta_neg"]),
            log_absent_pos=np.array(o["log_absent_pos"]),
            log_absent_neg=np.array(o["log_absent_neg"]),
        )
    tfidf = None
    if obj["tfidf"] is not None:
        tfidf = TfIdfModel(
            doc_counts=dict(obj["tfidf"]["doc_counts"]),
            df={c: dict(t) for c, t in obj["tfidf"]["df"].items()},
        )
    cfgo = obj["config"]
    config = PipelineConfig(
        C=cfgo["C"],
        calibration=cfgo["calibration"],
        folds=cfgo["folds"],
        content_columns=tuple(cfgo["content_columns"])
        if cfgo["content_columns"] is not None
        else None,
        graph_columns=tuple(cfgo["graph_columns"])
        if cfgo["graph_columns"] is not None
        else None,
    )
    ctx = ContextParams(**obj["context"])
    gcfg = GraphMetricsConfig(**obj["graph_cfg"])
    return TrainedPipeline(
        kind=obj["kind"],
        context_params=ctx,
        graph_cfg=gcfg,
        config=config,
        lexicon=set(obj["lexicon"]),
        manifest=list(obj["manifest"]),
        graph_manifest=list(obj["graph_manifest"]),
        head=_head_from_json(obj["head"]),
        tfidf=tfidf,
        nb=nb,
        content_head=_head_from_json(obj["content_head"]),
        graph_head=_head_from_json(obj["graph_head"]),
    )


def load_pipeline(path: str) -> TrainedPipeline:
    with open(path, "r", encoding="utf-8") as fh:
        return pipeline_from_json(fh.read())

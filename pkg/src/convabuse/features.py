"""Feature-matrix assembly: context resolution, batch extraction, CSV export.

A FeatureStore holds everything about a labeled dataset that does not depend
on a train/test split: graph features (a pure function of the thread), static
content features, and cached token lists. The model-dependent content
features (tf-idf scores, NB posterior) are computed per split from fitted
models via content_model_matrix.
"""

from __future__ import annotations

import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .content import (
    CONTENT_MANIFEST,
    collapse,
    normalize_tokenize,
    static_features,
)
from .convgraph import modes_from_authors
from .corpus import ABUSE, NON_ABUSE, Corpus, LabeledDataset, thread_context
from .errors import UnknownMessageError
from .graphmetrics import GraphMetricsConfig, compute_feature_vector, feature_manifest
from .learn import NBModel, nb_posterior

THREADS_ENV = "CONVABUSE_THREADS"


@dataclass(frozen=True)
class ContextParams:
    before_count: int = 674
    after_count: int = 675
    window_len: int = 10

    def __post_init__(self):
        if self.before_count < 0 or self.after_count < 0:
            raise ValueError("context counts must be non-negative")
        if self.window_len < 2:
            raise ValueError("window_len must be at least 2")


def resolve_threads(requested: int | None = None) -> int:
    """Explicit argument beats the environment beats the core count."""
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            warnings.warn(f"ignoring non-integer {THREADS_ENV}={env!r}")
    return os.cpu_count() or 1


def _graph_row(args) -> np.ndarray:
    authors, target_index, window_len, cfg = args
    before, after, full = modes_from_authors(list(authors), target_index, window_len)
    vec = compute_feature_vector(before, after, full, authors[target_index], cfg)
    return vec.values


@dataclass
class FeatureStore:
    ids: list[str]
    labels: np.ndarray  # +1 abuse / -1 non-abuse
    texts: list[str]
    raw_tokens: list[list[str]]
    collapsed_tokens: list[list[str]]
    content_static: np.ndarray  # (n, 24)
    graph: np.ndarray  # (n, graph manifest length)
    graph_names: list[str]
    lexicon: set[str] = field(default_factory=set)
    skipped: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.ids)


def build_store(
    corpus: Corpus,
    dataset: LabeledDataset,
    params: ContextParams,
    lexicon: set[str],
    cfg: GraphMetricsConfig | None = None,
    threads: int | None = None,
) -> FeatureStore:
    """Extract every split-independent feature for the dataset's messages."""
    cfg = cfg or GraphMetricsConfig()
    jobs = []
    ids: list[str] = []
    labels: list[int] = []
    texts: list[str] = []
    skipped: list[str] = []
    for mid, label in dataset.items:
        try:
            ctx = thread_context(corpus, mid, params.before_count, params.after_count)
        except UnknownMessageError:
            skipped.append(mid)
            continue
        ids.append(mid)
        labels.append(1 if label == ABUSE else -1)
        texts.append(ctx.target.text)
        authors = tuple(m.author_id for m in ctx.messages)
        jobs.append((authors, ctx.target_index, params.window_len, cfg))
    if skipped:
        warnings.warn(f"skipped {len(skipped)} messages without resolvable context")

    n_threads = resolve_threads(threads)
    if n_threads > 1 and len(jobs) > 1:
        chunk = max(1, len(jobs) // (n_threads * 4))
        with ProcessPoolExecutor(max_workers=n_threads) as pool:
            rows = list(pool.map(_graph_row, jobs, chunksize=chunk))
    else:
        rows = [_graph_row(j) for j in jobs]

    raw_tokens = [normalize_tokenize(t) for t in texts]
    collapsed_tokens = [normalize_tokenize(collapse(t)) for t in texts]
    static = (
        np.vstack([static_features(t, lexicon) for t in texts])
        if texts
        else np.zeros((0, len(CONTENT_MANIFEST) - 5))
    )
    names = feature_manifest(cfg)
    graph = np.vstack(rows) if rows else np.zeros((0, len(names)))
    return FeatureStore(
        ids=ids,
        labels=np.asarray(labels),
        texts=texts,
        raw_tokens=raw_tokens,
        collapsed_tokens=collapsed_tokens,
        content_static=static,
        graph=graph,
        graph_names=names,
        lexicon=set(lexicon),
        skipped=skipped,
    )


def content_model_matrix(
    store: FeatureStore,
    tfidf_model,
    nb_model: NBModel,
    rows: np.ndarray | None = None,
) -> np.ndarray:
    """Model-dependent content features (tf-idf x4, NB posterior) per message."""
    idx = list(range(len(store))) if rows is None else list(rows)
    out = np.empty((len(idx), 5))
    for k, i in enumerate(idx):
        raw = store.raw_tokens[i]
        coll = store.collapsed_tokens[i]
        out[k, 0] = tfidf_model.score(ABUSE, raw)
        out[k, 1] = tfidf_model.score(NON_ABUSE, raw)
        out[k, 2] = tfidf_model.score(ABUSE, coll)
        out[k, 3] = tfidf_model.score(NON_ABUSE, coll)
        out[k, 4] = nb_posterior(nb_model, raw)
    return out


def write_feature_csv(
    path: str,
    ids: list[str],
    labels: np.ndarray,
    matrix: np.ndarray,
    names: list[str],
) -> None:
    """Deterministic full-precision CSV: message_id,label,<feature columns>."""
    if matrix.shape != (len(ids), len(names)):
        raise ValueError("matrix shape does not match ids/names")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("message_id,label," + ",".join(names) + "\n")
        for i, mid in enumerate(ids):
            label = ABUSE if labels[i] > 0 else NON_ABUSE
            vals = ",".join("%.17g" % v for v in matrix[i])
            fh.write(f"{mid},{label},{vals}\n")

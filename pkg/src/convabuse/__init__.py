"""Abusive-message detection from message content and conversation structure.

Feature extraction (29 content features, 246 conversation-graph features),
linear SVM training with probability calibration, early/late/hybrid fusion,
repeated-split evaluation, and backward feature elimination.
"""

from .content import CONTENT_MANIFEST, content_feature_vector, load_lexicon
from .convgraph import ConvGraph, extract_graph, extract_modes
from .corpus import (
    ABUSE,
    NON_ABUSE,
    UNLABELED,
    Corpus,
    LabeledDataset,
    SynthParams,
    build_balanced_dataset,
    generate_synthetic,
    load_corpus,
    serialize_corpus,
    thread_context,
)
from .errors import (
    ConfigError,
    ConvAbuseError,
    CorpusFormatError,
    DatasetBalanceError,
    FitError,
    ManifestMismatchError,
    UnknownMessageError,
)
from .evaluation import evaluate, make_splits, pipeline_runner
from .features import ContextParams, FeatureStore, build_store
from .fusion import (
    KINDS,
    PipelineConfig,
    TrainedPipeline,
    load_pipeline,
    save_pipeline,
    score,
    train_pipeline,
)
from .graphmetrics import GraphMetricsConfig, compute_feature_vector, feature_manifest
from .selection import rfe, top_features

__version__ = "1.0.0"

__all__ = [
    "ABUSE",
    "CONTENT_MANIFEST",
    "ConfigError",
    "ContextParams",
    "ConvAbuseError",
    "ConvGraph",
    "Corpus",
    "CorpusFormatError",
    "DatasetBalanceError",
    "FeatureStore",
    "FitError",
    "GraphMetricsConfig",
    "KINDS",
    "LabeledDataset",
    "ManifestMismatchError",
    "NON_ABUSE",
    "PipelineConfig",
    "SynthParams",
    "TrainedPipeline",
    "UNLABELED",
    "UnknownMessageError",
    "build_balanced_dataset",
    "build_store",
    "compute_feature_vector",
    "content_feature_vector",
    "evaluate",
    "extract_graph",
    "extract_modes",
    "feature_manifest",
    "generate_synthetic",
    "load_corpus",
    "load_lexicon",
    "load_pipeline",
    "make_splits",
    "pipeline_runner",
    "rfe",
    "save_pipeline",
    "score",
    "serialize_corpus",
    "thread_context",
    "top_features",
    "train_pipeline",
]

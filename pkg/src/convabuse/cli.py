"""Command-line entry point.

Subcommands: ingest, synth, featurize, train, eval, rfe, score, manifest.
Options may come from a TOML config file (--config); explicit flags win.
Exit codes: 0 success, 1 usage/config error, 2 data error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

import numpy as np

from .content import CONTENT_MANIFEST, default_lexicon_path, load_lexicon
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
from .evaluation import evaluate, make_splits, pipeline_runner, write_report, write_timings
from .features import ContextParams, build_store, write_feature_csv, content_model_matrix
from .fusion import (
    KINDS,
    KIND_LATE,
    LATE_MANIFEST,
    PipelineConfig,
    load_pipeline,
    save_pipeline,
    score,
    train_pipeline,
    _fit_content_models,
)
from .graphmetrics import GraphMetricsConfig, feature_manifest
from .selection import RFE_KINDS, fixed_matrix, late_top_features, rfe, top_features

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; the contract here is exit 1
    def error(self, message):
        raise UsageError(message)


def _sha256_file(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _merged(args: argparse.Namespace, defaults: dict) -> dict:
    """defaults < TOML config < explicit flags."""
    out = dict(defaults)
    path = getattr(args, "config", None)
    if path:
        try:
            with open(path, "rb") as fh:
                data = tomllib.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"invalid TOML in {path}: {exc}") from None
        for key, value in data.items():
            if key in out:
                out[key] = value
    for key in defaults:
        value = getattr(args, key, None)
        if value is not None:
            out[key] = value
    return out


def _require(cfg: dict, *keys: str) -> None:
    for key in keys:
        if cfg.get(key) is None:
            raise UsageError(f"missing required option --{key.replace('_', '-')}")


def _echo(cfg: dict, hashes: dict) -> dict:
    # the output location must not alter artifact bytes
    shown = {k: v for k, v in cfg.items() if k != "out"}
    return {"config": shown, "input_sha256": hashes}


def _load_lexicon(cfg: dict) -> tuple[set, str]:
    path = cfg.get("lexicon") or default_lexicon_path()
    return load_lexicon(path), path


def _all_labeled(corpus: Corpus) -> LabeledDataset:
    items = [(m.message_id, m.label) for m in corpus if m.label != UNLABELED]
    return LabeledDataset(items=tuple(items))


def _dataset(corpus: Corpus, cfg: dict) -> LabeledDataset:
    per_class = cfg.get("per_class")
    if per_class is not None:
        per_class = int(per_class)
    return build_balanced_dataset(corpus, int(cfg["seed"]), per_class)


def _jobs(cfg: dict) -> int | None:
    jobs = cfg.get("jobs")
    return None if jobs is None else int(jobs)


def _context_params(cfg: dict) -> ContextParams:
    return ContextParams(
        before_count=int(cfg["before"]),
        after_count=int(cfg["after"]),
        window_len=int(cfg["window"]),
    )


def _pipeline_config(cfg: dict) -> PipelineConfig:
    return PipelineConfig(
        C=float(cfg["c"]),
        calibration=str(cfg["calibration"]),
        folds=int(cfg["folds"]),
    )


def _write_json(obj: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(obj, sort_keys=True, indent=1))
        fh.write("\n")


# ---- subcommands ----

_CTX_DEFAULTS = {"before": 674, "after": 675, "window": 10}
_LEARN_DEFAULTS = {"c": 1.0, "calibration": "oof", "folds": 5}


def cmd_ingest(args) -> int:
    cfg = _merged(args, {"corpus": None, "out": None})
    _require(cfg, "corpus")
    corpus = load_corpus(cfg["corpus"])
    stats = corpus.stats()
    obj = {
        "message_count": stats.message_count,
        "thread_count": stats.thread_count,
        "label_counts": stats.label_counts,
        **_echo(cfg, {"corpus": _sha256_file(cfg["corpus"])}),
    }
    if cfg["out"]:
        os.makedirs(cfg["out"], exist_ok=True)
        _write_json(obj, os.path.join(cfg["out"], "ingest.json"))
    print(
        f"{stats.message_count} messages in {stats.thread_count} threads; "
        + ", ".join(f"{k}={v}" for k, v in sorted(stats.label_counts.items()))
    )
    return EXIT_OK


def cmd_synth(args) -> int:
    cfg = _merged(
        args,
        {
            "out": None,
            "seed": 0,
            "n_threads": 40,
            "authors": 12,
            "messages": 50,
            "abuse_rate": 0.05,
            "pile_on": 4,
            "badword_rate": 0.55,
            "caps_rate": 0.3,
            "lexicon": None,
        },
    )
    _require(cfg, "out")
    lexicon, _ = _load_lexicon(cfg)
    params = SynthParams(
        n_threads=int(cfg["n_threads"]),
        authors_per_thread=int(cfg["authors"]),
        messages_per_thread=int(cfg["messages"]),
        abuse_rate=float(cfg["abuse_rate"]),
        pile_on_size=int(cfg["pile_on"]),
        badword_injection_rate=float(cfg["badword_rate"]),
        caps_rate=float(cfg["caps_rate"]),
        seed=int(cfg["seed"]),
    )
    params.validate()
    corpus = generate_synthetic(params, lexicon)
    with open(cfg["out"], "w", encoding="utf-8", newline="\n") as fh:
        serialize_corpus(corpus, fh)
    stats = corpus.stats()
    print(
        f"wrote {stats.message_count} messages to {cfg['out']} "
        f"({stats.label_counts.get(ABUSE, 0)} abuse)"
    )
    return EXIT_OK


def cmd_featurize(args) -> int:
    cfg = _merged(
        args,
        {
            "corpus": None,
            "lexicon": None,
            "out": None,
            "scope": "all",
            "seed": 0,
            "per_class": None,
            "jobs": None,
            **_CTX_DEFAULTS,
        },
    )
    _require(cfg, "corpus", "out")
    if cfg["scope"] not in ("all", "balanced"):
        raise UsageError("scope must be 'all' or 'balanced'")
    corpus = load_corpus(cfg["corpus"])
    lexicon, lex_path = _load_lexicon(cfg)
    dataset = (
        _all_labeled(corpus) if cfg["scope"] == "all" else _dataset(corpus, cfg)
    )
    if len(dataset) == 0:
        raise DatasetBalanceError("no labeled messages to featurize")
    store = build_store(
        corpus, dataset, _context_params(cfg), lexicon, threads=_jobs(cfg)
    )
    # model-dependent content columns are fit on the whole export set; the
    # training pipelines never reuse these, they refit inside each fold
    tfidf, nb = _fit_content_models(store, np.arange(len(store)))
    content29 = np.hstack([store.content_static, content_model_matrix(store, tfidf, nb)])
    os.makedirs(cfg["out"], exist_ok=True)
    write_feature_csv(
        os.path.join(cfg["out"], "content.csv"),
        store.ids,
        store.labels,
        content29,
        CONTENT_MANIFEST,
    )
    write_feature_csv(
        os.path.join(cfg["out"], "graph.csv"),
        store.ids,
        store.labels,
        store.graph,
        store.graph_names,
    )
    _write_json(
        {
            "rows": len(store),
            "skipped": store.skipped,
            **_echo(
                cfg,
                {"corpus": _sha256_file(cfg["corpus"]), "lexicon": _sha256_file(lex_path)},
            ),
        },
        os.path.join(cfg["out"], "featurize.json"),
    )
    print(f"featurized {len(store)} messages into {cfg['out']}")
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = _merged(
        args,
        {
            "corpus": None,
            "lexicon": None,
            "out": None,
            "kind": None,
            "seed": 0,
            "per_class": None,
            "jobs": None,
            **_CTX_DEFAULTS,
            **_LEARN_DEFAULTS,
        },
    )
    _require(cfg, "corpus", "out", "kind")
    if cfg["kind"] not in KINDS:
        raise UsageError(f"kind must be one of {', '.join(KINDS)}")
    corpus = load_corpus(cfg["corpus"])
    lexicon, lex_path = _load_lexicon(cfg)
    dataset = _dataset(corpus, cfg)
    ctx_params = _context_params(cfg)
    store = build_store(corpus, dataset, ctx_params, lexicon, threads=_jobs(cfg))
    pipeline = train_pipeline(
        cfg["kind"], store, np.arange(len(store)), ctx_params, _pipeline_config(cfg)
    )
    os.makedirs(cfg["out"], exist_ok=True)
    bundle_path = os.path.join(cfg["out"], f"pipeline_{cfg['kind']}.json")
    save_pipeline(pipeline, bundle_path)
    _write_json(
        {
            "bundle": os.path.basename(bundle_path),
            "rows": len(store),
            "skipped": store.skipped,
            "feature_count": len(pipeline.manifest),
            **_echo(
                cfg,
                {"corpus": _sha256_file(cfg["corpus"]), "lexicon": _sha256_file(lex_path)},
            ),
        },
        os.path.join(cfg["out"], "train.json"),
    )
    print(f"trained {cfg['kind']} pipeline on {len(store)} messages -> {bundle_path}")
    return EXIT_OK


def cmd_eval(args) -> int:
    cfg = _merged(
        args,
        {
            "corpus": None,
            "lexicon": None,
            "out": None,
            "kind": None,
            "seed": 0,
            "per_class": None,
            "reps": 10,
            "jobs": None,
            **_CTX_DEFAULTS,
            **_LEARN_DEFAULTS,
        },
    )
    _require(cfg, "corpus", "out", "kind")
    if cfg["kind"] not in KINDS:
        raise UsageError(f"kind must be one of {', '.join(KINDS)}")
    if int(cfg["reps"]) < 1:
        raise UsageError("reps must be positive")
    corpus = load_corpus(cfg["corpus"])
    lexicon, lex_path = _load_lexicon(cfg)
    dataset = _dataset(corpus, cfg)
    ctx_params = _context_params(cfg)
    store = build_store(corpus, dataset, ctx_params, lexicon, threads=_jobs(cfg))
    plan = make_splits(store.labels, int(cfg["seed"]), int(cfg["reps"]))
    runner = pipeline_runner(cfg["kind"], ctx_params, _pipeline_config(cfg))
    report, timings = evaluate(store, plan, cfg["kind"], runner)
    os.makedirs(cfg["out"], exist_ok=True)
    extra = _echo(
        cfg, {"corpus": _sha256_file(cfg["corpus"]), "lexicon": _sha256_file(lex_path)}
    )
    write_report(report, os.path.join(cfg["out"], "report.json"), extra)
    write_timings(timings, os.path.join(cfg["out"], "timings.json"))
    print(
        f"kind={cfg['kind']} reps={len(plan.splits)} "
        f"P={report.mean_precision:.4f} R={report.mean_recall:.4f} "
        f"F={report.mean_f:.4f} (std {report.std_f:.4f})"
    )
    return EXIT_OK


def _run_rfe_for(kind, store, cfg):
    X, names = fixed_matrix(kind, store, _pipeline_config(cfg))
    plan = make_splits(store.labels, int(cfg["seed"]), int(cfg["reps"]))
    trace = rfe(X, store.labels, names, plan, C=float(cfg["c"]))
    tf = top_features(trace, trace.full_f, float(cfg["threshold"]))
    return trace, tf


def cmd_rfe(args) -> int:
    cfg = _merged(
        args,
        {
            "corpus": None,
            "lexicon": None,
            "out": None,
            "kind": None,
            "seed": 0,
            "per_class": None,
            "reps": 10,
            "threshold": 0.97,
            "jobs": None,
            **_CTX_DEFAULTS,
            **_LEARN_DEFAULTS,
        },
    )
    _require(cfg, "corpus", "out", "kind")
    valid = RFE_KINDS + (KIND_LATE,)
    if cfg["kind"] not in valid:
        raise UsageError(f"kind must be one of {', '.join(valid)}")
    if not 0.0 < float(cfg["threshold"]) <= 1.0:
        raise UsageError("threshold must be in (0, 1]")
    corpus = load_corpus(cfg["corpus"])
    lexicon, lex_path = _load_lexicon(cfg)
    dataset = _dataset(corpus, cfg)
    store = build_store(
        corpus, dataset, _context_params(cfg), lexicon, threads=_jobs(cfg)
    )
    os.makedirs(cfg["out"], exist_ok=True)
    hashes = {"corpus": _sha256_file(cfg["corpus"]), "lexicon": _sha256_file(lex_path)}

    def emit(kind, trace, tf):
        with open(
            os.path.join(cfg["out"], f"trace_{kind}.csv"),
            "w",
            encoding="utf-8",
            newline="\n",
        ) as fh:
            fh.write(trace.to_csv())
        _write_json(
            {
                "kind": kind,
                "full_f": trace.full_f,
                "threshold": cfg["threshold"],
                "top_features": tf,
                **_echo(cfg, hashes),
            },
            os.path.join(cfg["out"], f"tf_{kind}.json"),
        )

    if cfg["kind"] == KIND_LATE:
        c_trace, c_tf = _run_rfe_for("content", store, cfg)
        g_trace, g_tf = _run_rfe_for("graph", store, cfg)
        emit("content", c_trace, c_tf)
        emit("graph", g_trace, g_tf)
        _write_json(
            {"kind": KIND_LATE, **late_top_features(c_tf, g_tf), **_echo(cfg, hashes)},
            os.path.join(cfg["out"], "tf_late.json"),
        )
        print(f"late TF = content {len(c_tf)} + graph {len(g_tf)} features")
    else:
        trace, tf = _run_rfe_for(cfg["kind"], store, cfg)
        emit(cfg["kind"], trace, tf)
        print(f"{cfg['kind']} TF: {len(tf)} of {len(trace.manifest)} features")
    return EXIT_OK


def cmd_score(args) -> int:
    cfg = _merged(
        args, {"bundle": None, "corpus": None, "message_id": None, "out": None}
    )
    _require(cfg, "bundle", "corpus", "message_id")
    pipeline = load_pipeline(cfg["bundle"])
    corpus = load_corpus(cfg["corpus"])
    prob, label = score(pipeline, corpus, cfg["message_id"])
    obj = {"message_id": cfg["message_id"], "probability": prob, "label": label}
    print(json.dumps(obj, sort_keys=True))
    if cfg["out"]:
        os.makedirs(cfg["out"], exist_ok=True)
        _write_json(obj, os.path.join(cfg["out"], "score.json"))
    return EXIT_OK


def cmd_manifest(args) -> int:
    cfg = _merged(args, {"kind": None})
    _require(cfg, "kind")
    if cfg["kind"] not in KINDS:
        raise UsageError(f"kind must be one of {', '.join(KINDS)}")
    graph_names = feature_manifest(GraphMetricsConfig())
    per_kind = {
        "content": list(CONTENT_MANIFEST),
        "graph": graph_names,
        "early": list(CONTENT_MANIFEST) + graph_names,
        "late": list(LATE_MANIFEST),
        "hybrid": list(CONTENT_MANIFEST) + graph_names + list(LATE_MANIFEST),
    }
    for name in per_kind[cfg["kind"]]:
        print(name)
    return EXIT_OK


# ---- wiring ----


def _add_common(sub, *groups):
    sub.add_argument("--config", help="TOML config file; flags override its values")
    if "corpus" in groups:
        sub.add_argument("--corpus", help="corpus JSONL path")
        sub.add_argument("--lexicon", help="bad-word lexicon path (default: bundled)")
    if "out" in groups:
        sub.add_argument("--out", help="output directory")
    if "dataset" in groups:
        sub.add_argument("--seed", type=int, help="dataset/split seed")
        sub.add_argument("--per-class", type=int, dest="per_class",
                         help="cap per-class dataset size")
    if "ctx" in groups:
        sub.add_argument("--before", type=int, help="context messages before the target")
        sub.add_argument("--after", type=int, help="context messages after the target")
        sub.add_argument("--window", type=int, help="sliding window length")
    if "learn" in groups:
        sub.add_argument("--c", type=float, help="SVM regularization C")
        sub.add_argument("--calibration", choices=["oof", "insample"],
                         help="probability calibration mode")
        sub.add_argument("--folds", type=int, help="internal cross-fitting folds")
    if "jobs" in groups:
        sub.add_argument("--jobs", type=int,
                         help="parallel featurization processes "
                              "(default: CONVABUSE_THREADS or core count)")
    if "kind" in groups:
        sub.add_argument("--kind", help="pipeline kind")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="convabuse", description=__doc__)
    subs = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = subs.add_parser("ingest", help="validate a corpus and report stats")
    _add_common(p, "corpus", "out")
    p.set_defaults(func=cmd_ingest)

    p = subs.add_parser("synth", help="generate a synthetic labeled corpus")
    p.add_argument("--config", help="TOML config file; flags override its values")
    p.add_argument("--out", help="output JSONL path")
    p.add_argument("--seed", type=int)
    p.add_argument("--n-threads", type=int, dest="n_threads", help="thread count")
    p.add_argument("--authors", type=int, help="authors per thread")
    p.add_argument("--messages", type=int, help="messages per thread")
    p.add_argument("--abuse-rate", type=float, dest="abuse_rate")
    p.add_argument("--pile-on", type=int, dest="pile_on", help="repliers after abuse")
    p.add_argument("--badword-rate", type=float, dest="badword_rate")
    p.add_argument("--caps-rate", type=float, dest="caps_rate")
    p.add_argument("--lexicon", help="lexicon words to inject (default: bundled)")
    p.set_defaults(func=cmd_synth)

    p = subs.add_parser("featurize", help="write content/graph feature CSVs")
    _add_common(p, "corpus", "out", "dataset", "ctx", "jobs")
    p.add_argument("--scope", choices=["all", "balanced"],
                   help="featurize all labeled messages or a balanced sample")
    p.set_defaults(func=cmd_featurize)

    p = subs.add_parser("train", help="train one pipeline and save its bundle")
    _add_common(p, "corpus", "out", "dataset", "ctx", "learn", "jobs", "kind")
    p.set_defaults(func=cmd_train)

    p = subs.add_parser("eval", help="run the repeated 70/30 evaluation")
    _add_common(p, "corpus", "out", "dataset", "ctx", "learn", "jobs", "kind")
    p.add_argument("--reps", type=int, help="number of split repetitions")
    p.set_defaults(func=cmd_eval)

    p = subs.add_parser("rfe", help="backward feature elimination and top features")
    _add_common(p, "corpus", "out", "dataset", "ctx", "learn", "jobs", "kind")
    p.add_argument("--reps", type=int, help="split repetitions per step")
    p.add_argument("--threshold", type=float, help="top-feature F retention threshold")
    p.set_defaults(func=cmd_rfe)

    p = subs.add_parser("score", help="score one message with a saved bundle")
    p.add_argument("--config", help="TOML config file; flags override its values")
    p.add_argument("--bundle", help="trained pipeline JSON")
    p.add_argument("--corpus", help="corpus JSONL path")
    p.add_argument("--message-id", dest="message_id", help="message to score")
    p.add_argument("--out", help="optional output directory")
    p.set_defaults(func=cmd_score)

    p = subs.add_parser("manifest", help="print a pipeline kind's feature manifest")
    p.add_argument("--config", help="TOML config file; flags override its values")
    p.add_argument("--kind", help="pipeline kind")
    p.set_defaults(func=cmd_manifest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if getattr(args, "func", None) is None:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (
        CorpusFormatError,
        UnknownMessageError,
        DatasetBalanceError,
        FitError,
        ManifestMismatchError,
    ) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ConvAbuseError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())

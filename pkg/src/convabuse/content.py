"""Content features computed from message text alone.

The vector has 29 entries, in this fixed order:

  1  char_count            length in code points
  2  avg_word_len          mean token length (0 when no tokens)
  3  max_word_len
  4  unique_chars          distinct code points, case-sensitive
  5..16 per character class (letters, digits, punctuation, whitespace,
        symbols, other): raw count then ratio of char_count
  17 capitals_count        uppercase code points
  18 capitals_ratio
  19 lzw_ratio             compressibility, see lzw_ratio()
  20 collapse_delta        char_count minus collapsed char_count
  21 word_count
  22 unique_words
  23 badwords_raw          lexicon hits in the raw tokens
  24 badwords_collapsed    lexicon hits after letter-run collapsing
  25 tfidf_abuse_raw       class tf-idf scores, raw and collapsed tokens
  26 tfidf_nonabuse_raw
  27 tfidf_abuse_collapsed
  28 tfidf_nonabuse_collapsed
  29 nb_abuse_posterior    Bernoulli naive-Bayes P(abuse | tokens)

Entries 25-29 need fitted models; the rest depend only on the text and the
bad-word lexicon.
"""

from __future__ import annotations

import math
import unicodedata
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .corpus import ABUSE, NON_ABUSE
from .errors import ConfigError, FitError
from .learn import NBModel, nb_posterior

CHAR_CLASSES = ("letters", "digits", "punctuation", "whitespace", "symbols", "other")

CONTENT_MANIFEST: list[str] = [
    "char_count",
    "avg_word_len",
    "max_word_len",
    "unique_chars",
    *(f"{cls}_{kind}" for cls in CHAR_CLASSES for kind in ("count", "ratio")),
    "capitals_count",
    "capitals_ratio",
    "lzw_ratio",
    "collapse_delta",
    "word_count",
    "unique_words",
    "badwords_raw",
    "badwords_collapsed",
    "tfidf_abuse_raw",
    "tfidf_nonabuse_raw",
    "tfidf_abuse_collapsed",
    "tfidf_nonabuse_collapsed",
    "nb_abuse_posterior",
]

N_STATIC = 24  # features 1..24 need no fitted model


def normalize_tokenize(text: str) -> list[str]:
    """Lowercase, strip punctuation characters, split on whitespace."""
    lowered = text.lower()
    stripped = "".join(
        ch for ch in lowered if not unicodedata.category(ch).startswith("P")
    )
    return stripped.split()


def collapse(text: str) -> str:
    """Squeeze every run of 3+ identical characters down to exactly two."""
    out: list[str] = []
    run_ch = ""
    run_len = 0
    for ch in text:
        if ch == run_ch:
            run_len += 1
        else:
            run_ch = ch
            run_len = 1
        if run_len <= 2:
            out.append(ch)
    return "".join(out)


def lzw_ratio(text: str) -> float:
    """Characters per emitted LZW code; 1.0 for empty or incompressible text.

    The dictionary starts from the distinct code points of the text in
    ordinal order and grows in emission order.
    """
    if not text:
        return 1.0
    table: dict[str, int] = {}
    for ch in sorted(set(text)):
        table[ch] = len(table)
    emitted = 0
    prefix = text[0]
    for ch in text[1:]:
        candidate = prefix + ch
        if candidate in table:
            prefix = candidate
        else:
            emitted += 1
            table[candidate] = len(table)
            prefix = ch
    emitted += 1
    return len(text) / emitted


def char_class(ch: str) -> str:
    cat = unicodedata.category(ch)
    if cat.startswith("L"):
        return "letters"
    if cat == "Nd":
        return "digits"
    if cat.startswith("P"):
        return "punctuation"
    if ch.isspace() or cat.startswith("Z"):
        return "whitespace"
    if cat.startswith("S"):
        return "symbols"
    return "other"


def word_stats(text: str) -> tuple[int, int]:
    """(token count, distinct token count) after normalization."""
    tokens = normalize_tokenize(text)
    return len(tokens), len(set(tokens))


def char_class_counts(text: str) -> dict[str, int]:
    counts = dict.fromkeys(CHAR_CLASSES, 0)
    for ch in text:
        counts[char_class(ch)] += 1
    return counts


def default_lexicon_path() -> str:
    """Path of the lexicon file bundled with the package."""
    from importlib import resources

    return str(resources.files(__package__).joinpath("data/badwords.txt"))


def load_lexicon(path: str) -> set[str]:
    """One lowercase entry per line; '#' starts a comment."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read lexicon {path}: {exc}") from None
    entries = set()
    for raw in lines:
        word = raw.split("#", 1)[0].strip()
        if word:
            entries.add(word.lower())
    return entries


def badword_count(tokens: Sequence[str], lexicon: set[str]) -> int:
    return sum(1 for t in tokens if t in lexicon)


# ---- class tf-idf ----


@dataclass
class TfIdfModel:
    """Per-class document frequencies with smoothed idf."""

    doc_counts: dict[str, int] = field(default_factory=dict)  # class -> N_c
    df: dict[str, dict[str, int]] = field(default_factory=dict)  # class -> token -> df

    def idf(self, label: str, token: str) -> float:
        n_c = self.doc_counts.get(label, 0)
        df_t = self.df.get(label, {}).get(token, 0)
        return math.log((1.0 + n_c) / (1.0 + df_t)) + 1.0

    def score(self, label: str, tokens: Sequence[str]) -> float:
        """Sum of tf * idf over the distinct tokens of a message."""
        tf: dict[str, int] = {}
        for t in tokens:
            tf[t] = tf.get(t, 0) + 1
        return sum(count * self.idf(label, tok) for tok, count in tf.items())


def tfidf_fit(token_lists: Iterable[Sequence[str]], labels: Iterable[str]) -> TfIdfModel:
    model = TfIdfModel()
    for tokens, label in zip(token_lists, labels):
        model.doc_counts[label] = model.doc_counts.get(label, 0) + 1
        table = model.df.setdefault(label, {})
        for tok in set(tokens):
            table[tok] = table.get(tok, 0) + 1
    for label in (ABUSE, NON_ABUSE):
        if model.doc_counts.get(label, 0) == 0:
            raise FitError(f"tf-idf fit needs at least one {label} document")
    return model


# ---- feature assembly ----


def static_features(text: str, lexicon: set[str]) -> np.ndarray:
    """Features 1..24: everything that needs no fitted model."""
    n = len(text)
    tokens = normalize_tokenize(text)
    collapsed = collapse(text)
    collapsed_tokens = normalize_tokenize(collapsed)
    counts = char_class_counts(text)
    capitals = sum(1 for ch in text if ch.isupper())
    word_lens = [len(t) for t in tokens]
    feats = [
        float(n),
        float(np.mean(word_lens)) if word_lens else 0.0,
        float(max(word_lens)) if word_lens else 0.0,
        float(len(set(text))),
    ]
    for cls in CHAR_CLASSES:
        feats.append(float(counts[cls]))
        feats.append(counts[cls] / n if n else 0.0)
    feats += [
        float(capitals),
        capitals / n if n else 0.0,
        lzw_ratio(text),
        float(n - len(collapsed)),
        float(len(tokens)),
        float(len(set(tokens))),
        float(badword_count(tokens, lexicon)),
        float(badword_count(collapsed_tokens, lexicon)),
    ]
    return np.array(feats)


def model_features(
    text: str, tfidf_model: TfIdfModel, nb_model: NBModel
) -> np.ndarray:
    """Features 25..29: tf-idf class scores and the NB posterior."""
    tokens = normalize_tokenize(text)
    collapsed_tokens = normalize_tokenize(collapse(text))
    return np.array(
        [
            tfidf_model.score(ABUSE, tokens),
            tfidf_model.score(NON_ABUSE, tokens),
            tfidf_model.score(ABUSE, collapsed_tokens),
            tfidf_model.score(NON_ABUSE, collapsed_tokens),
            nb_posterior(nb_model, tokens),
        ]
    )


def content_feature_vector(
    text: str,
    tfidf_model: TfIdfModel,
    nb_model: NBModel,
    lexicon: set[str],
) -> np.ndarray:
    """All 29 content features in manifest order."""
    return np.concatenate(
        [static_features(text, lexicon), model_features(text, tfidf_model, nb_model)]
    )

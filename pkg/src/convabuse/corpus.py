"""Chat-log corpus handling: parsing, context slicing, dataset assembly.

Corpus files are JSON Lines, one message per line:

    {"message_id": "...", "thread_id": "...", "author_id": "...",
     "timestamp": 1234567890123, "text": "...", "label": "abuse"}

``label`` is optional ("abuse" / "non_abuse"; missing means unlabeled).
Messages are grouped by thread and ordered by (timestamp, message_id).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator

import numpy as np

from .errors import CorpusFormatError, DatasetBalanceError, UnknownMessageError

ABUSE = "abuse"
NON_ABUSE = "non_abuse"
UNLABELED = "unlabeled"

_LABELS = {ABUSE, NON_ABUSE, UNLABELED}


@dataclass(frozen=True)
class Message:
    message_id: str
    thread_id: str
    author_id: str
    timestamp: int  # epoch milliseconds
    text: str
    label: str = UNLABELED


@dataclass
class IngestStats:
    message_count: int = 0
    thread_count: int = 0
    label_counts: dict[str, int] = field(default_factory=dict)


class Corpus:
    """Messages grouped by thread, each thread sorted by (timestamp, message_id)."""

    def __init__(self, messages: Iterable[Message]):
        threads: dict[str, list[Message]] = {}
        for msg in messages:
            threads.setdefault(msg.thread_id, []).append(msg)
        for tid in threads:
            threads[tid].sort(key=lambda m: (m.timestamp, m.message_id))
        self.threads: dict[str, list[Message]] = threads
        self._index: dict[str, tuple[str, int]] = {}
        for tid, msgs in threads.items():
            for pos, msg in enumerate(msgs):
                if msg.message_id in self._index:
                    raise CorpusFormatError(
                        f"duplicate message_id {msg.message_id!r}"
                    )
                self._index[msg.message_id] = (tid, pos)

    def __len__(self) -> int:
        return len(self._index)

    def __contains__(self, message_id: str) -> bool:
        return message_id in self._index

    def __iter__(self) -> Iterator[Message]:
        for tid in self.threads:
            yield from self.threads[tid]

    def get(self, message_id: str) -> Message:
        try:
            tid, pos = self._index[message_id]
        except KeyError:
            raise UnknownMessageError(f"no message with id {message_id!r}") from None
        return self.threads[tid][pos]

    def position(self, message_id: str) -> tuple[str, int]:
        try:
            return self._index[message_id]
        except KeyError:
            raise UnknownMessageError(f"no message with id {message_id!r}") from None

    def ids_with_label(self, label: str) -> list[str]:
        return [m.message_id for m in self if m.label == label]

    def stats(self) -> IngestStats:
        counts: dict[str, int] = {}
        for msg in self:
            counts[msg.label] = counts.get(msg.label, 0) + 1
        return IngestStats(len(self), len(self.threads), counts)


@dataclass(frozen=True)
class ContextSlice:
    """A window of consecutive thread messages around one target message."""

    messages: tuple[Message, ...]
    target_index: int

    def __post_init__(self):
        if not 0 <= self.target_index < len(self.messages):
            raise ValueError("target_index out of range")

    @property
    def target(self) -> Message:
        return self.messages[self.target_index]

    def __len__(self) -> int:
        return len(self.messages)


@dataclass(frozen=True)
class LabeledDataset:
    """Message ids with binary labels; the unit eval and training operate on."""

    items: tuple[tuple[str, str], ...]  # (message_id, label)

    @property
    def ids(self) -> list[str]:
        return [mid for mid, _ in self.items]

    @property
    def labels(self) -> list[str]:
        return [lab for _, lab in self.items]

    def count(self, label: str) -> int:
        return sum(1 for _, lab in self.items if lab == label)

    def __len__(self) -> int:
        return len(self.items)


def _parse_line(raw: str, line_no: int) -> Message:
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise CorpusFormatError(f"invalid JSON ({exc.msg})", line_no) from None
    if not isinstance(obj, dict):
        raise CorpusFormatError("expected a JSON object", line_no)
    for key in ("message_id", "thread_id", "author_id", "timestamp", "text"):
        if key not in obj:
            raise CorpusFormatError(f"missing field {key!r}", line_no)
    ts = obj["timestamp"]
    if isinstance(ts, bool) or not isinstance(ts, int):
        raise CorpusFormatError("timestamp must be an integer (ms)", line_no)
    label = obj.get("label", UNLABELED)
    if label not in _LABELS:
        raise CorpusFormatError(f"unknown label {label!r}", line_no)
    for key in ("message_id", "thread_id", "author_id", "text"):
        if not isinstance(obj[key], str):
            raise CorpusFormatError(f"field {key!r} must be a string", line_no)
    if not obj["message_id"]:
        raise CorpusFormatError("message_id must be non-empty", line_no)
    return Message(
        message_id=obj["message_id"],
        thread_id=obj["thread_id"],
        author_id=obj["author_id"],
        timestamp=ts,
        text=obj["text"],
        label=label,
    )


def parse_corpus(stream: Iterable[str] | IO[str]) -> tuple[Corpus, IngestStats]:
    """Parse a JSONL stream into a Corpus. Blank lines are skipped.

    Raises CorpusFormatError with the offending line number on bad input.
    """
    messages = []
    for line_no, raw in enumerate(stream, start=1):
        if not raw.strip():
            continue
        messages.append(_parse_line(raw, line_no))
    corpus = Corpus(messages)
    return corpus, corpus.stats()


def load_corpus(path: str) -> Corpus:
    with open(path, "r", encoding="utf-8") as fh:
        corpus, _ = parse_corpus(fh)
    return corpus


def message_to_json(msg: Message) -> str:
    obj = {
        "message_id": msg.message_id,
        "thread_id": msg.thread_id,
        "author_id": msg.author_id,
        "timestamp": msg.timestamp,
        "text": msg.text,
    }
    if msg.label != UNLABELED:
        obj["label"] = msg.label
    return json.dumps(obj, ensure_ascii=False)


def serialize_corpus(corpus: Corpus, fh: IO[str]) -> None:
    """Write the corpus back out as JSONL (inverse of parse_corpus)."""
    for msg in corpus:
        fh.write(message_to_json(msg) + "\n")


def thread_context(
    corpus: Corpus, message_id: str, before_count: int, after_count: int
) -> ContextSlice:
    """Slice up to before_count messages before and after_count after the target.

    Counts clamp at thread boundaries, so the slice can be shorter than
    before_count + 1 + after_count.
    """
    if before_count < 0 or after_count < 0:
        raise ValueError("context counts must be non-negative")
    tid, pos = corpus.position(message_id)
    msgs = corpus.threads[tid]
    lo = max(0, pos - before_count)
    hi = min(len(msgs), pos + after_count + 1)
    return ContextSlice(messages=tuple(msgs[lo:hi]), target_index=pos - lo)


def build_balanced_dataset(
    corpus: Corpus, seed: int, per_class: int | None = None
) -> LabeledDataset:
    """All abuse messages plus an equal-count seeded sample of non-abuse ones.

    per_class, when given, caps both classes at that size (abuse is then a
    seeded subsample too). Raises DatasetBalanceError when the corpus cannot
    supply the required counts.
    """
    abuse_ids = corpus.ids_with_label(ABUSE)
    non_ids = corpus.ids_with_label(NON_ABUSE)
    rng = np.random.default_rng(seed)
    if per_class is not None:
        if len(abuse_ids) < per_class:
            raise DatasetBalanceError(
                f"need {per_class} abuse messages, corpus has {len(abuse_ids)}"
            )
        pick = rng.choice(len(abuse_ids), size=per_class, replace=False)
        abuse_ids = [abuse_ids[i] for i in sorted(pick)]
    n = len(abuse_ids)
    if n == 0:
        raise DatasetBalanceError("corpus has no abuse messages")
    if len(non_ids) < n:
        raise DatasetBalanceError(
            f"need {n} non-abuse messages, corpus has {len(non_ids)}"
        )
    pick = rng.choice(len(non_ids), size=n, replace=False)
    sampled = [non_ids[i] for i in sorted(pick)]
    items = [(mid, ABUSE) for mid in abuse_ids]
    items += [(mid, NON_ABUSE) for mid in sampled]
    return LabeledDataset(items=tuple(items))


# ---- synthetic corpus ----

_NEUTRAL_WORDS = (
    "hey anyone around here today we can trade the new map later sure "
    "thanks nice run that was close good game see you base left right "
    "push mid wait for me ready go again team plan next round win loss "
    "maybe tomorrow morning night early late check this out look what "
    "found build more first second third point score level quest item"
).split()

_ELONGATION_RATE = 0.35  # chance an abusive message stretches a letter


@dataclass(frozen=True)
class SynthParams:
    n_threads: int = 40
    authors_per_thread: int = 12
    messages_per_thread: int = 50
    abuse_rate: float = 0.05
    pile_on_size: int = 4
    attackers_per_thread: int = 2
    attacker_chatter_rate: float = 0.05
    badword_injection_rate: float = 0.55
    caps_rate: float = 0.3
    seed: int = 0

    def validate(self) -> None:
        if self.n_threads <= 0 or self.messages_per_thread <= 0:
            raise ValueError("thread and message counts must be positive")
        if self.authors_per_thread < 2:
            raise ValueError("need at least two authors per thread")
        if not 0.0 <= self.abuse_rate <= 1.0:
            raise ValueError("abuse_rate must be in [0, 1]")
        if not 0.0 <= self.badword_injection_rate <= 1.0:
            raise ValueError("badword_injection_rate must be in [0, 1]")
        if not 0.0 <= self.caps_rate <= 1.0:
            raise ValueError("caps_rate must be in [0, 1]")
        if not 0.0 <= self.attacker_chatter_rate <= 1.0:
            raise ValueError("attacker_chatter_rate must be in [0, 1]")
        if not 0 <= self.attackers_per_thread < self.authors_per_thread:
            raise ValueError("attackers_per_thread must leave regular authors")
        if self.pile_on_size < 0:
            raise ValueError("pile_on_size must be non-negative")
        # pile-on repliers come from the regular pool
        if self.pile_on_size > self.authors_per_thread - max(1, self.attackers_per_thread):
            raise ValueError("pile_on_size needs that many distinct repliers")


def _neutral_text(rng: np.random.Generator) -> str:
    k = int(rng.integers(3, 11))
    words = [_NEUTRAL_WORDS[int(i)] for i in rng.integers(0, len(_NEUTRAL_WORDS), k)]
    return " ".join(words)


def _abusive_text(rng: np.random.Generator, params: SynthParams, lexicon: list[str]) -> str:
    words = _neutral_text(rng).split()
    if lexicon and rng.random() < params.badword_injection_rate:
        n_bad = int(rng.integers(1, 3))
        for _ in range(n_bad):
            w = lexicon[int(rng.integers(0, len(lexicon)))]
            words.insert(int(rng.integers(0, len(words) + 1)), w)
    if rng.random() < _ELONGATION_RATE:
        i = int(rng.integers(0, len(words)))
        w = words[i]
        j = int(rng.integers(0, len(w)))
        words[i] = w[:j] + w[j] * int(rng.integers(4, 9)) + w[j:]
    text = " ".join(words)
    if rng.random() < params.caps_rate:
        text = text.upper()
    return text


def generate_synthetic(params: SynthParams, lexicon: Iterable[str]) -> Corpus:
    """Seeded synthetic chat corpus with planted abuse signals.

    Abusive messages carry content markers (lexicon words, caps, stretched
    letters, rates per params) and a structural signature: they come from a
    small set of per-thread attacker authors who rarely join the regular
    conversation, and each attack draws a pile-on of pile_on_size distinct
    regular authors replying immediately after. Regular chatter is uniform
    over the remaining authors. Deterministic for a given seed.
    """
    params.validate()
    lex = sorted(set(w.lower() for w in lexicon))
    rng = np.random.default_rng(params.seed)
    messages: list[Message] = []
    for t in range(params.n_threads):
        tid = f"t{t:04d}"
        authors = [f"{tid}_u{a:02d}" for a in range(params.authors_per_thread)]
        attackers = authors[: params.attackers_per_thread]
        regulars = authors[params.attackers_per_thread :]
        base_ts = 1_600_000_000_000 + t * 10_000_000
        slot = 0
        pile_queue: list[str] = []  # authors owed a pile-on reply
        while slot < params.messages_per_thread:
            mid = f"{tid}_m{slot:04d}"
            ts = base_ts + slot * 1000
            if pile_queue:
                author = pile_queue.pop(0)
                text = _neutral_text(rng)
                label = NON_ABUSE
            else:
                room = params.messages_per_thread - slot - 1
                if room >= params.pile_on_size and rng.random() < params.abuse_rate:
                    pool = attackers if attackers else authors
                    author = pool[int(rng.integers(0, len(pool)))]
                    text = _abusive_text(rng, params, lex)
                    label = ABUSE
                    others = [a for a in regulars if a != author]
                    pick = rng.choice(len(others), size=params.pile_on_size, replace=False)
                    pile_queue = [others[int(i)] for i in pick]
                else:
                    if attackers and rng.random() < params.attacker_chatter_rate:
                        author = attackers[int(rng.integers(0, len(attackers)))]
                    else:
                        pool = regulars if regulars else authors
                        author = pool[int(rng.integers(0, len(pool)))]
                    text = _neutral_text(rng)
                    label = NON_ABUSE
            messages.append(
                Message(
                    message_id=mid,
                    thread_id=tid,
                    author_id=author,
                    timestamp=ts,
                    text=text,
                    label=label,
                )
            )
            slot += 1
    return Corpus(messages)

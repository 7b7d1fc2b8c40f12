"""Corpus parsing, context slicing and dataset assembly."""

from __future__ import annotations

import io
import json

import pytest

from convabuse.corpus import (
    ABUSE,
    NON_ABUSE,
    Corpus,
    Message,
    SynthParams,
    build_balanced_dataset,
    generate_synthetic,
    parse_corpus,
    serialize_corpus,
    thread_context,
)
from convabuse.errors import (
    CorpusFormatError,
    DatasetBalanceError,
    UnknownMessageError,
)


def make_message(mid, tid="t1", author="u1", ts=0, text="hi", label=NON_ABUSE):
    return Message(mid, tid, author, ts, text, label)


def jsonl(*objs):
    return io.StringIO("\n".join(json.dumps(o) for o in objs) + "\n")


def valid_obj(mid="m1", **kw):
    obj = {
        "message_id": mid,
        "thread_id": "t1",
        "author_id": "u1",
        "timestamp": 1000,
        "text": "hello",
    }
    obj.update(kw)
    return obj


class TestParse:
    def test_basic_parse_and_stats(self):
        corpus, stats = parse_corpus(
            jsonl(
                valid_obj("m1", label="abuse"),
                valid_obj("m2", timestamp=2000),
                valid_obj("m3", thread_id="t2", timestamp=500),
            )
        )
        assert len(corpus) == 3
        assert stats.message_count == 3
        assert stats.thread_count == 2
        assert stats.label_counts["abuse"] == 1

    def test_threads_sorted_by_timestamp_then_id(self):
        corpus, _ = parse_corpus(
            jsonl(
                valid_obj("b", timestamp=100),
                valid_obj("a", timestamp=100),
                valid_obj("c", timestamp=50),
            )
        )
        assert [m.message_id for m in corpus.threads["t1"]] == ["c", "a", "b"]

    def test_bad_json_reports_line_number(self):
        stream = io.StringIO('{"message_id": "m1"\nnot json\n')
        with pytest.raises(CorpusFormatError) as exc:
            parse_corpus(stream)
        assert exc.value.line_no == 1

    def test_missing_field_rejected(self):
        obj = valid_obj()
        del obj["author_id"]
        with pytest.raises(CorpusFormatError):
            parse_corpus(jsonl(obj))

    def test_non_integer_timestamp_rejected(self):
        with pytest.raises(CorpusFormatError):
            parse_corpus(jsonl(valid_obj(timestamp="1000")))

    def test_unknown_label_rejected(self):
        with pytest.raises(CorpusFormatError):
            parse_corpus(jsonl(valid_obj(label="spam")))

    def test_duplicate_id_rejected(self):
        with pytest.raises(CorpusFormatError):
            parse_corpus(jsonl(valid_obj("m1"), valid_obj("m1", timestamp=2000)))

    def test_missing_label_means_unlabeled(self):
        corpus, stats = parse_corpus(jsonl(valid_obj()))
        assert corpus.get("m1").label == "unlabeled"
        assert stats.label_counts == {"unlabeled": 1}

    def test_roundtrip_parse_serialize_identity(self):
        corpus, _ = parse_corpus(
            jsonl(
                valid_obj("m1", label="abuse", text="héllo ✨"),
                valid_obj("m2", timestamp=2000),
                valid_obj("m3", thread_id="t2"),
            )
        )
        buf = io.StringIO()
        serialize_corpus(corpus, buf)
        again, _ = parse_corpus(io.StringIO(buf.getvalue()))
        assert [m for m in again] == [m for m in corpus]


class TestContext:
    def build(self, n=20):
        msgs = [make_message(f"m{i:03d}", ts=i * 10) for i in range(n)]
        return Corpus(msgs)

    def test_full_window(self):
        corpus = self.build(2000)
        ctx = thread_context(corpus, "m1000", 674, 675)
        assert len(ctx) == 1350
        assert ctx.target.message_id == "m1000"
        assert ctx.target_index == 674

    def test_clamped_at_start(self):
        corpus = self.build(20)
        ctx = thread_context(corpus, "m002", 5, 5)
        assert ctx.target_index == 2
        assert len(ctx) == 8

    def test_clamped_at_end(self):
        corpus = self.build(20)
        ctx = thread_context(corpus, "m018", 5, 5)
        assert len(ctx) == 7
        assert ctx.target.message_id == "m018"

    def test_length_bound(self):
        corpus = self.build(30)
        for mid in ("m000", "m015", "m029"):
            ctx = thread_context(corpus, mid, 7, 4)
            assert len(ctx) <= 7 + 1 + 4
            assert ctx.target.message_id == mid

    def test_unknown_message(self):
        corpus = self.build(5)
        with pytest.raises(UnknownMessageError):
            thread_context(corpus, "nope", 3, 3)


class TestBalancedDataset:
    def build(self, n_abuse=10, n_non=50):
        msgs = [
            make_message(f"a{i}", ts=i, label=ABUSE) for i in range(n_abuse)
        ] + [
            make_message(f"n{i}", ts=1000 + i, label=NON_ABUSE) for i in range(n_non)
        ]
        return Corpus(msgs)

    def test_balanced_and_deterministic(self):
        corpus = self.build()
        d1 = build_balanced_dataset(corpus, seed=7)
        d2 = build_balanced_dataset(corpus, seed=7)
        assert d1 == d2
        assert d1.count(ABUSE) == d1.count(NON_ABUSE) == 10
        assert set(mid for mid, lab in d1.items if lab == ABUSE) == {
            f"a{i}" for i in range(10)
        }

    def test_seed_changes_sample(self):
        corpus = self.build(10, 500)
        d1 = build_balanced_dataset(corpus, seed=1)
        d2 = build_balanced_dataset(corpus, seed=2)
        assert d1 != d2

    def test_insufficient_non_abuse(self):
        corpus = self.build(10, 5)
        with pytest.raises(DatasetBalanceError):
            build_balanced_dataset(corpus, seed=0)

    def test_per_class_cap(self):
        corpus = self.build(10, 50)
        d = build_balanced_dataset(corpus, seed=0, per_class=6)
        assert d.count(ABUSE) == d.count(NON_ABUSE) == 6


class TestSynthetic:
    def test_deterministic(self):
        params = SynthParams(n_threads=3, seed=42)
        lex = ["idiot", "stupid"]
        c1 = generate_synthetic(params, lex)
        c2 = generate_synthetic(params, lex)
        assert [m for m in c1] == [m for m in c2]

    def test_zero_abuse_rate(self):
        params = SynthParams(n_threads=2, abuse_rate=0.0, seed=1)
        corpus = generate_synthetic(params, ["idiot"])
        assert corpus.stats().label_counts.get(ABUSE, 0) == 0

    def test_abuse_present_at_moderate_rate(self):
        params = SynthParams(n_threads=10, abuse_rate=0.08, seed=3)
        corpus = generate_synthetic(params, ["idiot"])
        assert corpus.stats().label_counts.get(ABUSE, 0) > 5

    def test_pile_on_follows_abuse(self):
        params = SynthParams(n_threads=10, abuse_rate=0.08, pile_on_size=4, seed=9)
        corpus = generate_synthetic(params, ["idiot"])
        for msg in corpus:
            if msg.label != ABUSE:
                continue
            tid, pos = corpus.position(msg.message_id)
            thread = corpus.threads[tid]
            repliers = {m.author_id for m in thread[pos + 1 : pos + 5]}
            assert len(repliers) == 4
            assert msg.author_id not in repliers

    def test_param_validation(self):
        with pytest.raises(ValueError):
            SynthParams(pile_on_size=20, authors_per_thread=5).validate()
        with pytest.raises(ValueError):
            SynthParams(abuse_rate=1.5).validate()

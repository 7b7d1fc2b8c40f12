"""Window-based conversation graph extraction."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from convabuse.convgraph import (
    MODE_AFTER,
    MODE_BEFORE,
    MODE_FULL,
    ConvGraph,
    WindowParams,
    extract_graph,
    extract_modes,
)
from convabuse.corpus import ContextSlice, Message


def slice_from_authors(authors, target_index=None):
    if target_index is None:
        target_index = len(authors) - 1
    msgs = tuple(
        Message(f"m{i}", "t", a, i * 10, "x") for i, a in enumerate(authors)
    )
    return ContextSlice(messages=msgs, target_index=target_index)


def weights(g: ConvGraph):
    return {
        (g.vertices[i], g.vertices[j]): w for (i, j), w in g.edges.items()
    }


class TestHandTrace:
    def test_abac_window3(self):
        ctx = slice_from_authors(["A", "B", "A", "C"])
        g = extract_graph(ctx, WindowParams(MODE_FULL, 3))
        assert weights(g) == {
            ("B", "A"): 1.0,
            ("A", "B"): 1.0,
            ("C", "A"): 1.0,
            ("C", "B"): 0.5,
        }
        assert g.vertices == ["A", "B", "C"]

    def test_most_recent_partner_gets_full_increment(self):
        ctx = slice_from_authors(["A", "B"])
        g = extract_graph(ctx, WindowParams(MODE_FULL, 10))
        assert weights(g) == {("B", "A"): 1.0}

    def test_no_self_loops(self):
        ctx = slice_from_authors(["A", "A", "A", "B", "A"])
        g = extract_graph(ctx, WindowParams(MODE_FULL, 4))
        assert all(i != j for (i, j) in g.edges)

    def test_before_after_ranges(self):
        ctx = slice_from_authors(["A", "B", "C", "D", "E"], target_index=2)
        before = extract_graph(ctx, WindowParams(MODE_BEFORE, 3))
        after = extract_graph(ctx, WindowParams(MODE_AFTER, 3))
        assert set(before.vertices) == {"A", "B", "C"}
        assert set(after.vertices) == {"C", "D", "E"}

    def test_single_message_graph(self):
        ctx = slice_from_authors(["A"])
        g = extract_graph(ctx, WindowParams(MODE_FULL, 10))
        assert g.vertices == ["A"]
        assert g.edges == {}

    def test_targeted_author_recorded(self):
        ctx = slice_from_authors(["A", "B", "C"], target_index=1)
        g = extract_graph(ctx, WindowParams(MODE_FULL, 5))
        assert g.targeted_author == "B"

    def test_window_param_validation(self):
        with pytest.raises(ValueError):
            WindowParams(MODE_FULL, 1)
        with pytest.raises(ValueError):
            WindowParams("sideways", 5)


@st.composite
def author_sequences(draw):
    n_authors = draw(st.integers(2, 6))
    length = draw(st.integers(1, 40))
    names = [f"u{i}" for i in range(n_authors)]
    seq = draw(st.lists(st.sampled_from(names), min_size=length, max_size=length))
    target = draw(st.integers(0, length - 1))
    window = draw(st.integers(2, 10))
    return seq, target, window


class TestInvariants:
    @settings(max_examples=200, deadline=None)
    @given(author_sequences())
    def test_mode_consistency(self, case):
        seq, target, window = case
        ctx = slice_from_authors(seq, target)
        before, after, full = extract_modes(ctx, window)
        assert set(full.vertices) == set(before.vertices) | set(after.vertices)
        for g in (before, after):
            for (i, j), w in g.edges.items():
                src, dst = g.vertices[i], g.vertices[j]
                assert full.weight(src, dst) >= w - 1e-9

    @settings(max_examples=200, deadline=None)
    @given(author_sequences())
    def test_weight_bound_and_positivity(self, case):
        seq, target, window = case
        ctx = slice_from_authors(seq, target)
        g = extract_graph(ctx, WindowParams(MODE_FULL, window))
        assert all(w > 0 for w in g.edges.values())
        assert g.total_weight() <= len(seq) * (window - 1) + 1e-9

    @settings(max_examples=100, deadline=None)
    @given(author_sequences())
    def test_deterministic(self, case):
        seq, target, window = case
        ctx = slice_from_authors(seq, target)
        g1 = extract_graph(ctx, WindowParams(MODE_FULL, window))
        g2 = extract_graph(ctx, WindowParams(MODE_FULL, window))
        assert g1.vertices == g2.vertices
        assert g1.edges == g2.edges

    def test_mode_consistency_bulk_seeded(self):
        # a denser sweep than hypothesis: 1000 seeded random contexts
        rng = np.random.default_rng(1234)
        for _ in range(1000):
            n_authors = int(rng.integers(2, 8))
            length = int(rng.integers(1, 60))
            seq = [f"u{int(a)}" for a in rng.integers(0, n_authors, length)]
            target = int(rng.integers(0, length))
            window = int(rng.integers(2, 12))
            ctx = slice_from_authors(seq, target)
            before, after, full = extract_modes(ctx, window)
            assert set(full.vertices) == set(before.vertices) | set(after.vertices)
            for g in (before, after):
                for (i, j), w in g.edges.items():
                    src, dst = g.vertices[i], g.vertices[j]
                    assert full.weight(src, dst) >= w - 1e-9


class TestDump:
    def test_dump_format(self):
        ctx = slice_from_authors(["A", "B", "A", "C"])
        g = extract_graph(ctx, WindowParams(MODE_FULL, 3))
        text = g.dump()
        lines = text.strip().split("\n")
        assert lines[0] == "# target=C mode=full"
        assert "B A 1.000000" in lines
        assert "C B 0.500000" in lines

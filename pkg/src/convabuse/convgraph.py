"""Conversation graphs from message streams.

A sliding window of the last L messages moves over the context one message at
a time; the author of the newest message in the window gets a directed edge
toward the author of every other window message, weighted by recency:
an edge increment of (L - d) / (L - 1) for a partner d positions back.
Self-links are never created. Three graphs are built per target message:
"before" (context start through the target), "after" (target through context
end) and "full" (the whole context).

Vertices are author ids in order of first appearance in the processed range.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

from .corpus import ContextSlice

MODE_BEFORE = "before"
MODE_AFTER = "after"
MODE_FULL = "full"
MODES = (MODE_BEFORE, MODE_AFTER, MODE_FULL)


@dataclass(frozen=True)
class WindowParams:
    mode: str = MODE_FULL
    window_len: int = 10  # L

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.window_len < 2:
            raise ValueError("window_len must be at least 2")


@dataclass
class ConvGraph:
    """Directed weighted multigraphless author graph (weights > 0)."""

    vertices: list[str]
    edges: dict[tuple[int, int], float]  # (src_index, dst_index) -> weight
    targeted_author: str | None
    mode: str

    _vindex: dict[str, int] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self._vindex:
            self._vindex = {a: i for i, a in enumerate(self.vertices)}

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def vertex_index(self, author: str) -> int | None:
        return self._vindex.get(author)

    def weight(self, src: str, dst: str) -> float:
        i, j = self._vindex.get(src), self._vindex.get(dst)
        if i is None or j is None:
            return 0.0
        return self.edges.get((i, j), 0.0)

    def total_weight(self) -> float:
        return sum(self.edges.values())

    def dump(self) -> str:
        """Edge-list text: header comment, then "src dst weight" lines."""
        target = self.targeted_author if self.targeted_author is not None else "-"
        buf = io.StringIO()
        buf.write(f"# target={target} mode={self.mode}\n")
        for (i, j), w in sorted(self.edges.items()):
            buf.write(f"{self.vertices[i]} {self.vertices[j]} {w:.6f}\n")
        return buf.getvalue()


def graph_from_authors(
    authors: list[str], targeted_author: str, mode: str, window_len: int
) -> ConvGraph:
    """Build one graph from an author sequence (already cut to the mode span)."""
    L = window_len
    vertices: list[str] = []
    vindex: dict[str, int] = {}
    for a in authors:
        if a not in vindex:
            vindex[a] = len(vertices)
            vertices.append(a)

    edges: dict[tuple[int, int], float] = {}
    denom = float(L - 1)
    for pos, cur in enumerate(authors):
        ci = vindex[cur]
        first = max(0, pos - L + 1)
        for back in range(first, pos):
            d = pos - back
            partner = authors[back]
            if partner == cur:
                continue
            key = (ci, vindex[partner])
            edges[key] = edges.get(key, 0.0) + (L - d) / denom
    return ConvGraph(
        vertices=vertices,
        edges=edges,
        targeted_author=targeted_author,
        mode=mode,
    )


def extract_graph(context: ContextSlice, params: WindowParams) -> ConvGraph:
    """Build the conversation graph for one mode around the context's target."""
    t = context.target_index
    if params.mode == MODE_BEFORE:
        span = context.messages[: t + 1]
    elif params.mode == MODE_AFTER:
        span = context.messages[t:]
    else:
        span = context.messages
    return graph_from_authors(
        [m.author_id for m in span],
        context.target.author_id,
        params.mode,
        params.window_len,
    )


def modes_from_authors(
    authors: list[str], target_index: int, window_len: int = 10
) -> tuple[ConvGraph, ConvGraph, ConvGraph]:
    """Before, after and full graphs from a bare author sequence."""
    target = authors[target_index]
    return (
        graph_from_authors(authors[: target_index + 1], target, MODE_BEFORE, window_len),
        graph_from_authors(authors[target_index:], target, MODE_AFTER, window_len),
        graph_from_authors(list(authors), target, MODE_FULL, window_len),
    )


def extract_modes(
    context: ContextSlice, window_len: int = 10
) -> tuple[ConvGraph, ConvGraph, ConvGraph]:
    """Before, after and full graphs for one context."""
    return modes_from_authors(
        [m.author_id for m in context.messages], context.target_index, window_len
    )

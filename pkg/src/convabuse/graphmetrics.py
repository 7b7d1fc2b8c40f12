"""Topological measures over conversation graphs, plus the feature manifest.

Every measure is computed on one of four views of a directed weighted graph:
directed/undirected x weighted/unweighted (undirected merges antiparallel
edges by summing weights). Weighted shortest-path lengths use 1/weight so
heavier edges are shorter. Missing values (empty graph, absent target author,
undefined statistic) are returned as 0.0 with a missingness flag, keeping
feature vectors total.

Conventions that differ between libraries and therefore are pinned here:
- closeness(v) = (r_v - 1) / sum of distances from v to its reachable set
  (r_v counts v itself; isolated vertices get 0)
- eccentricity(v) = max distance to a reachable vertex, 0 when none
- diameter/radius = max/min eccentricity over vertices with r_v > 1
- betweenness uses fractional credit for tied shortest paths, endpoints
  excluded, undirected counts each unordered pair once
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .convgraph import ConvGraph

try:  # compiled kernels for the hot measures; Python paths stay as fallbacks
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False

GRAPH_LETTERS = ("B", "A", "F")


@dataclass(frozen=True)
class GraphMetricsConfig:
    damping: float = 0.85
    pagerank_tol: float = 1e-10
    pagerank_max_iter: int = 200
    hits_tol: float = 1e-10
    hits_max_iter: int = 200


# ---- views ----


@dataclass
class GraphView:
    n: int
    directed: bool
    weighted: bool
    adj: list[dict[int, float]]  # out-neighbors (symmetric when undirected)

    def reverse(self) -> "GraphView":
        radj: list[dict[int, float]] = [dict() for _ in range(self.n)]
        for i, nb in enumerate(self.adj):
            for j, w in nb.items():
                radj[j][i] = w
        return GraphView(self.n, self.directed, self.weighted, radj)

    def edge_count(self) -> int:
        m = sum(len(nb) for nb in self.adj)
        return m if self.directed else m // 2

    def dense(self) -> np.ndarray:
        W = np.zeros((self.n, self.n))
        for i, nb in enumerate(self.adj):
            for j, w in nb.items():
                W[i, j] = w
        return W


@dataclass
class GraphViews:
    dw: GraphView  # directed weighted
    du: GraphView  # directed unweighted
    uw: GraphView  # undirected weighted (antiparallel weights summed)
    uu: GraphView  # undirected unweighted


def graph_views(g: ConvGraph) -> GraphViews:
    n = g.n_vertices
    dw: list[dict[int, float]] = [dict() for _ in range(n)]
    du: list[dict[int, float]] = [dict() for _ in range(n)]
    uw: list[dict[int, float]] = [dict() for _ in range(n)]
    uu: list[dict[int, float]] = [dict() for _ in range(n)]
    for (i, j), w in g.edges.items():
        dw[i][j] = w
        du[i][j] = 1.0
        uw[i][j] = uw[i].get(j, 0.0) + w
        uw[j][i] = uw[j].get(i, 0.0) + w
        uu[i][j] = 1.0
        uu[j][i] = 1.0
    return GraphViews(
        dw=GraphView(n, True, True, dw),
        du=GraphView(n, True, False, du),
        uw=GraphView(n, False, True, uw),
        uu=GraphView(n, False, False, uu),
    )


# ---- degree family ----


def degree_strength(view: GraphView, direction: str = "out") -> tuple[np.ndarray, np.ndarray]:
    """Edge counts and weight sums per vertex.

    direction "in"/"out" applies to directed views; undirected views count
    each neighbor once regardless.
    """
    v = view
    if direction == "in" and view.directed:
        v = view.reverse()
    deg = np.array([float(len(nb)) for nb in v.adj])
    strength = np.array([float(sum(nb.values())) for nb in v.adj])
    return deg, strength


def coreness(view: GraphView, direction: str = "all") -> np.ndarray:
    """Peeling cores on an unweighted view; directional degree for digraphs."""
    n = view.n
    if n == 0:
        return np.zeros(0)
    if view.directed and direction == "in":
        deg_view, removal = view.reverse(), view
    elif view.directed and direction == "out":
        deg_view, removal = view, view.reverse()
    else:
        deg_view = removal = view
    # removal.adj[v] lists the vertices whose degree drops when v is removed
    deg = np.array([len(nb) for nb in deg_view.adj], dtype=int)
    alive = np.ones(n, dtype=bool)
    core = np.zeros(n, dtype=int)
    k = 0
    for _ in range(n):
        cand = np.flatnonzero(alive)
        v = cand[np.argmin(deg[cand])]
        k = max(k, int(deg[v]))
        core[v] = k
        alive[v] = False
        for u in removal.adj[v]:
            if alive[u]:
                deg[u] -= 1
    return core.astype(float)


# ---- shortest-path profile (distances + betweenness in one pass) ----


@dataclass
class SPProfile:
    dist: np.ndarray  # (n, n), np.inf where unreachable, 0 diagonal
    betweenness: np.ndarray

    reach_out: np.ndarray = field(init=False)
    reach_in: np.ndarray = field(init=False)

    def __post_init__(self):
        finite = np.isfinite(self.dist)
        self.reach_out = finite.sum(axis=1)
        self.reach_in = finite.sum(axis=0)

    def _closeness(self, dist_rows: np.ndarray, reach: np.ndarray) -> np.ndarray:
        n = dist_rows.shape[0]
        out = np.zeros(n)
        for v in range(n):
            r = reach[v]
            if r > 1:
                total = dist_rows[v][np.isfinite(dist_rows[v])].sum()
                out[v] = (r - 1) / total
        return out

    def closeness_out(self) -> np.ndarray:
        return self._closeness(self.dist, self.reach_out)

    def closeness_in(self) -> np.ndarray:
        return self._closeness(self.dist.T, self.reach_in)

    def _ecc(self, dist_rows: np.ndarray, reach: np.ndarray) -> np.ndarray:
        n = dist_rows.shape[0]
        out = np.zeros(n)
        for v in range(n):
            if reach[v] > 1:
                out[v] = dist_rows[v][np.isfinite(dist_rows[v])].max()
        return out

    def eccentricity_out(self) -> np.ndarray:
        return self._ecc(self.dist, self.reach_out)

    def eccentricity_in(self) -> np.ndarray:
        return self._ecc(self.dist.T, self.reach_in)

    def diameter_radius(self) -> tuple[float, float]:
        ecc = self.eccentricity_out()
        mask = self.reach_out > 1
        if not mask.any():
            return 0.0, 0.0
        return float(ecc[mask].max()), float(ecc[mask].min())

    def avg_path_length(self) -> float:
        n = self.dist.shape[0]
        if n < 2:
            return 0.0
        off = ~np.eye(n, dtype=bool)
        finite = np.isfinite(self.dist) & off
        if not finite.any():
            return 0.0
        return float(self.dist[finite].mean())


def _sp_kernel(indptr, indices, lengths, n):
    # All-sources Dijkstra plus Brandes accumulation on CSR arrays. Unit
    # lengths make this an exact BFS, so one kernel serves both view kinds.
    dist = np.full((n, n), np.inf)
    bet = np.zeros(n)
    d = np.empty(n)
    sigma = np.empty(n)
    done = np.empty(n, np.bool_)
    order = np.empty(n, np.int32)
    preds = np.empty((n, n), np.int32)
    pred_count = np.empty(n, np.int32)
    delta = np.empty(n)
    for s in range(n):
        for v in range(n):
            d[v] = np.inf
            sigma[v] = 0.0
            done[v] = False
            pred_count[v] = 0
        d[s] = 0.0
        sigma[s] = 1.0
        cnt = 0
        while True:
            u = -1
            best = np.inf
            for v in range(n):
                if not done[v] and d[v] < best:
                    best = d[v]
                    u = v
            if u < 0:
                break
            done[u] = True
            order[cnt] = u
            cnt += 1
            for e in range(indptr[u], indptr[u + 1]):
                v = indices[e]
                nd = best + lengths[e]
                if nd < d[v]:
                    d[v] = nd
                    sigma[v] = sigma[u]
                    preds[v, 0] = u
                    pred_count[v] = 1
                elif nd == d[v]:
                    sigma[v] += sigma[u]
                    preds[v, pred_count[v]] = u
                    pred_count[v] += 1
        for v in range(n):
            delta[v] = 0.0
        for idx in range(cnt - 1, -1, -1):
            u = order[idx]
            for pi in range(pred_count[u]):
                p = preds[u, pi]
                delta[p] += sigma[p] / sigma[u] * (1.0 + delta[u])
            if u != s:
                bet[u] += delta[u]
        for v in range(n):
            dist[s, v] = d[v]
    return dist, bet


if _HAVE_NUMBA:
    _sp_kernel = njit(cache=True)(_sp_kernel)


def _view_csr(view: GraphView) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    indptr = np.zeros(view.n + 1, dtype=np.int64)
    indices = np.empty(view.edge_count() * (1 if view.directed else 2), dtype=np.int64)
    lengths = np.empty(indices.shape[0])
    pos = 0
    for i, nb in enumerate(view.adj):
        for j, w in nb.items():
            indices[pos] = j
            lengths[pos] = 1.0 / w if view.weighted else 1.0
            pos += 1
        indptr[i + 1] = pos
    return indptr, indices, lengths


def sp_profile(view: GraphView) -> SPProfile:
    """All-sources shortest paths plus Brandes betweenness."""
    if _HAVE_NUMBA:
        indptr, indices, lengths = _view_csr(view)
        dist, bet = _sp_kernel(indptr, indices, lengths, view.n)
        if not view.directed:
            bet /= 2.0
        return SPProfile(dist=dist, betweenness=bet)
    return _sp_profile_py(view)


def _sp_profile_py(view: GraphView) -> SPProfile:
    n = view.n
    dist = np.full((n, n), np.inf)
    bet = np.zeros(n)
    adj = view.adj
    for s in range(n):
        d = [np.inf] * n
        sigma = [0.0] * n
        preds: list[list[int]] = [[] for _ in range(n)]
        order: list[int] = []
        d[s] = 0.0
        sigma[s] = 1.0
        if view.weighted:
            heap = [(0.0, s)]
            done = [False] * n
            while heap:
                du, u = heapq.heappop(heap)
                if done[u]:
                    continue
                done[u] = True
                order.append(u)
                for v, w in adj[u].items():
                    nd = du + 1.0 / w
                    if nd < d[v]:
                        d[v] = nd
                        sigma[v] = sigma[u]
                        preds[v] = [u]
                        heapq.heappush(heap, (nd, v))
                    elif nd == d[v]:
                        sigma[v] += sigma[u]
                        preds[v].append(u)
        else:
            queue = deque([s])
            while queue:
                u = queue.popleft()
                order.append(u)
                for v in adj[u]:
                    nd = d[u] + 1.0
                    if d[v] == np.inf:
                        d[v] = nd
                        sigma[v] = sigma[u]
                        preds[v] = [u]
                        queue.append(v)
                    elif nd == d[v]:
                        sigma[v] += sigma[u]
                        preds[v].append(u)
        delta = [0.0] * n
        for u in reversed(order):
            for p in preds[u]:
                delta[p] += sigma[p] / sigma[u] * (1.0 + delta[u])
            if u != s:
                bet[u] += delta[u]
        dist[s] = d
    if not view.directed:
        bet /= 2.0
    return SPProfile(dist=dist, betweenness=bet)


def closeness_eccentricity(view: GraphView) -> tuple[np.ndarray, np.ndarray, float, float, float]:
    """Closeness, eccentricity (outgoing), diameter, radius, avg path length."""
    prof = sp_profile(view)
    diam, rad = prof.diameter_radius()
    return (
        prof.closeness_out(),
        prof.eccentricity_out(),
        diam,
        rad,
        prof.avg_path_length(),
    )


def betweenness(view: GraphView) -> np.ndarray:
    return sp_profile(view).betweenness


# ---- spectral family ----


def pagerank(view: GraphView, cfg: GraphMetricsConfig = GraphMetricsConfig()) -> np.ndarray:
    """Power iteration with uniform teleport; dangling mass spread uniformly."""
    n = view.n
    if n == 0:
        return np.zeros(0)
    W = view.dense()
    out = W.sum(axis=1)
    dangling = out == 0.0
    P = np.zeros_like(W)
    nz = ~dangling
    P[nz] = W[nz] / out[nz, None]
    d = cfg.damping
    r = np.full(n, 1.0 / n)
    base = (1.0 - d) / n
    for _ in range(cfg.pagerank_max_iter):
        r_new = base + d * (P.T @ r + r[dangling].sum() / n)
        if np.abs(r_new - r).sum() < cfg.pagerank_tol:
            return r_new
        r = r_new
    return r


def hits(view: GraphView, cfg: GraphMetricsConfig = GraphMetricsConfig()) -> tuple[np.ndarray, np.ndarray]:
    """Hub and authority scores, L2-normalized; all zeros when edgeless."""
    n = view.n
    if n == 0:
        return np.zeros(0), np.zeros(0)
    W = view.dense()
    if not W.any():
        return np.zeros(n), np.zeros(n)
    h = np.full(n, 1.0 / np.sqrt(n))
    a = np.zeros(n)
    for _ in range(cfg.hits_max_iter):
        a_new = W.T @ h
        a_new /= np.linalg.norm(a_new)
        h_new = W @ a_new
        h_new /= np.linalg.norm(h_new)
        if max(np.abs(a_new - a).max(), np.abs(h_new - h).max()) < cfg.hits_tol:
            return h_new, a_new
        a, h = a_new, h_new
    return h, a


# ---- local structure ----


def reciprocity_density_counts(view: GraphView) -> tuple[float, float, int, int]:
    """(reciprocity, density, vertex count, edge count) on a directed view."""
    n = view.n
    m = view.edge_count()
    density = m / (n * (n - 1)) if n > 1 else 0.0
    recip = 0
    for i, nb in enumerate(view.adj):
        for j in nb:
            if i in view.adj[j]:
                recip += 1
    reciprocity = recip / m if m > 0 else 0.0
    return reciprocity, density, n, m


def clustering_transitivity(view: GraphView) -> tuple[np.ndarray, float]:
    """Local clustering per vertex and global transitivity (undirected view).

    Weighted views use geometric-mean triangle intensity with weights scaled
    by the maximum edge weight; transitivity always counts plain triangles.
    """
    n = view.n
    local = np.zeros(n)
    if n == 0:
        return local, 0.0
    W = view.dense()
    A = (W > 0.0).astype(float)
    k = A.sum(axis=1)
    pairs = k * (k - 1.0)
    triples = int(round(pairs.sum())) // 2
    # diag(A^3) counts ordered closed neighbor pairs, so halve it
    closed2 = np.einsum("ij,jk,ki->i", A, A, A)
    closed = int(round(closed2.sum())) // 2
    nonzero = pairs > 0.0
    if view.weighted:
        wmax = W.max()
        B = np.where(W > 0.0, W / (wmax if wmax > 0.0 else 1.0), 0.0) ** (1.0 / 3.0)
        acc2 = np.einsum("ij,jk,ki->i", B, B, B)
        local[nonzero] = acc2[nonzero] / pairs[nonzero]
    else:
        local[nonzero] = closed2[nonzero] / pairs[nonzero]
    transitivity = closed / triples if triples > 0 else 0.0
    return local, transitivity


# ---- modularity ----


def partition_modularity(view: GraphView, membership: list[int]) -> float:
    """Newman Q of a given partition on an undirected view."""
    m = 0.0
    w_in: dict[int, float] = {}
    sig: dict[int, float] = {}
    for i, nb in enumerate(view.adj):
        for j, w in nb.items():
            if j < i:
                continue
            m += w
            ci, cj = membership[i], membership[j]
            sig[ci] = sig.get(ci, 0.0) + w
            sig[cj] = sig.get(cj, 0.0) + w
            if ci == cj:
                w_in[ci] = w_in.get(ci, 0.0) + w
    if m == 0.0:
        return 0.0
    q = 0.0
    for c in sig:
        q += w_in.get(c, 0.0) / m - (sig[c] / (2.0 * m)) ** 2
    return q


def _mod_sweep(order, indptr, indices, weights, k, sigma, comm, m):
    # One level's greedy sweep, the same pass the Python loop below runs:
    # candidates visited in ascending community id, strict-gain moves only.
    nn = order.shape[0]
    link = np.zeros(nn)
    touched = np.empty(nn, np.int64)
    moved_any = False
    while True:
        moved = False
        for oi in range(nn):
            v = order[oi]
            cv = comm[v]
            nt = 0
            for e in range(indptr[v], indptr[v + 1]):
                cu = comm[indices[e]]
                if link[cu] == 0.0:  # weights are positive, 0 means unseen
                    touched[nt] = cu
                    nt += 1
                link[cu] += weights[e]
            kv = k[v]
            sigma[cv] -= kv
            best_c = cv
            best_gain = link[cv] - sigma[cv] * kv / (2.0 * m)
            cand = np.sort(touched[:nt])
            for ci in range(nt):
                c = cand[ci]
                if c == cv:
                    continue
                gain = link[c] - sigma[c] * kv / (2.0 * m)
                if gain > best_gain + 1e-12:
                    best_gain = gain
                    best_c = c
            comm[v] = best_c
            sigma[best_c] += kv
            if best_c != cv:
                moved = True
                moved_any = True
            for ti in range(nt):
                link[touched[ti]] = 0.0
        if not moved:
            break
    return moved_any


if _HAVE_NUMBA:
    _mod_sweep = njit(cache=True)(_mod_sweep)


def _level_csr(neighbors: list[dict[int, float]]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    nn = len(neighbors)
    total = sum(len(nb) for nb in neighbors)
    indptr = np.zeros(nn + 1, dtype=np.int64)
    indices = np.empty(total, dtype=np.int64)
    weights = np.empty(total)
    pos = 0
    for i, nb in enumerate(neighbors):
        for j, w in nb.items():
            indices[pos] = j
            weights[pos] = w
            pos += 1
        indptr[i + 1] = pos
    return indptr, indices, weights


def modularity(view: GraphView) -> tuple[float, list[int]]:
    """Deterministic multilevel greedy modularity (Q, membership).

    Sweep order is label-invariant (strength descending, then node id); a
    vertex only moves on a strict gain, ties keep it in its community.
    """
    n = view.n
    if n == 0:
        return 0.0, []
    neighbors: list[dict[int, float]] = [dict(nb) for nb in view.adj]
    selfw = [0.0] * n
    membership = list(range(n))  # original vertex -> current-level node
    m2 = sum(sum(nb.values()) for nb in neighbors)  # = 2m, loops not present yet
    if m2 == 0.0:
        return 0.0, membership
    m = m2 / 2.0

    while True:
        nn = len(neighbors)
        k = [sum(nb.values()) + 2.0 * selfw[v] for v, nb in enumerate(neighbors)]
        order = sorted(range(nn), key=lambda v: (-k[v], v))
        comm = list(range(nn))
        sigma = k.copy()
        if _HAVE_NUMBA:
            comm_arr = np.arange(nn, dtype=np.int64)
            moved_any = bool(
                _mod_sweep(
                    np.asarray(order, dtype=np.int64),
                    *_level_csr(neighbors),
                    np.asarray(k, dtype=float),
                    np.asarray(sigma, dtype=float),
                    comm_arr,
                    m,
                )
            )
            comm = [int(c) for c in comm_arr]
        else:
            moved_any = False
            while True:
                moved = False
                for v in order:
                    cv = comm[v]
                    link: dict[int, float] = {}
                    for u, w in neighbors[v].items():
                        cu = comm[u]
                        link[cu] = link.get(cu, 0.0) + w
                    sigma[cv] -= k[v]
                    # gains scaled by m; constant terms common to all choices dropped
                    best_c = cv
                    best_gain = link.get(cv, 0.0) - sigma[cv] * k[v] / (2.0 * m)
                    for c in sorted(link):
                        if c == cv:
                            continue
                        gain = link[c] - sigma[c] * k[v] / (2.0 * m)
                        if gain > best_gain + 1e-12:
                            best_gain = gain
                            best_c = c
                    comm[v] = best_c
                    sigma[best_c] += k[v]
                    if best_c != cv:
                        moved = True
                        moved_any = True
                if not moved:
                    break
        if not moved_any:
            break
        # aggregate communities into nodes (compact ids by smallest member)
        groups: dict[int, list[int]] = {}
        for v, c in enumerate(comm):
            groups.setdefault(c, []).append(v)
        ordered = sorted(groups.values(), key=min)
        remap = {}
        for new_id, members in enumerate(ordered):
            for v in members:
                remap[v] = new_id
        nn_new = len(ordered)
        new_neighbors: list[dict[int, float]] = [dict() for _ in range(nn_new)]
        new_selfw = [0.0] * nn_new
        for new_id, members in enumerate(ordered):
            for v in members:
                new_selfw[new_id] += selfw[v]
        for v, nb in enumerate(neighbors):
            cv = remap[v]
            for u, w in nb.items():
                cu = remap[u]
                if cu == cv:
                    if u > v:
                        new_selfw[cv] += w
                else:
                    new_neighbors[cv][cu] = new_neighbors[cv].get(cu, 0.0) + w
        membership = [remap[c] for c in membership]
        if nn_new == nn:
            break
        neighbors = new_neighbors
        selfw = new_selfw

    q = partition_modularity(view, membership)
    return q, membership


# ---- components and assortativity ----


def components_assortativity(view: GraphView) -> tuple[int, float, float]:
    """(component count, largest-component fraction, degree assortativity)."""
    n = view.n
    if n == 0:
        return 0, 0.0, 0.0
    seen = [False] * n
    sizes = []
    for s in range(n):
        if seen[s]:
            continue
        size = 0
        queue = deque([s])
        seen[s] = True
        while queue:
            u = queue.popleft()
            size += 1
            for v in view.adj[u]:
                if not seen[v]:
                    seen[v] = True
                    queue.append(v)
        sizes.append(size)
    count = len(sizes)
    largest = max(sizes) / n
    deg = np.array([float(len(nb)) for nb in view.adj])
    xs, ys = [], []
    for i, nb in enumerate(view.adj):
        for j in nb:
            xs.append(deg[i])
            ys.append(deg[j])
    assort = 0.0
    if xs:
        x = np.array(xs)
        y = np.array(ys)
        sx, sy = x.std(), y.std()
        if sx > 0 and sy > 0:
            assort = float(((x - x.mean()) * (y - y.mean())).mean() / (sx * sy))
    return count, largest, assort


# ---- manifest ----


@dataclass(frozen=True)
class MeasureSpec:
    measure: str
    graph: str  # B | A | F
    weights: str  # W | U | -
    direction: str  # I | O | D | U | -
    scale: str  # N | G

    @property
    def name(self) -> str:
        parts = [self.graph, self.measure]
        if self.weights != "-":
            parts.append(self.weights)
        if self.direction != "-":
            parts.append(self.direction)
        parts.append(self.scale)
        return "_".join(parts)


# (measure, weights, direction) variants emitting both vertex and graph scale
_VERTEX_VARIANTS: list[tuple[str, str, str]] = (
    [("degree", "-", d) for d in ("I", "O", "U")]
    + [("strength", "W", d) for d in ("I", "O", "U")]
    + [("coreness", "-", d) for d in ("I", "O", "U")]
    + [("closeness", w, d) for w in ("U", "W") for d in ("I", "O", "U")]
    + [("eccentricity", w, d) for w in ("U", "W") for d in ("I", "O", "U")]
    + [("betweenness", w, d) for w in ("U", "W") for d in ("D", "U")]
    + [("pagerank", w, "D") for w in ("U", "W")]
    + [("hub", w, "D") for w in ("U", "W")]
    + [("authority", w, "D") for w in ("U", "W")]
    + [("clustering", w, "U") for w in ("U", "W")]
)

_GLOBAL_VARIANTS: list[tuple[str, str, str]] = [
    ("vertex_count", "-", "-"),
    ("edge_count", "-", "D"),
    ("density", "-", "D"),
    ("reciprocity", "-", "D"),
    ("diameter", "U", "U"),
    ("diameter", "W", "U"),
    ("radius", "U", "U"),
    ("radius", "W", "U"),
    ("avg_path_length", "U", "U"),
    ("avg_path_length", "W", "U"),
    ("transitivity", "-", "U"),
    ("modularity", "U", "U"),
    ("modularity", "W", "U"),
    ("assortativity", "-", "U"),
    ("component_count", "-", "U"),
    ("largest_component_fraction", "-", "U"),
]


def manifest_specs(config: GraphMetricsConfig = GraphMetricsConfig()) -> list[MeasureSpec]:
    specs: list[MeasureSpec] = []
    for graph in GRAPH_LETTERS:
        for measure, w, d in _VERTEX_VARIANTS:
            for scale in ("N", "G"):
                specs.append(MeasureSpec(measure, graph, w, d, scale))
        for measure, w, d in _GLOBAL_VARIANTS:
            specs.append(MeasureSpec(measure, graph, w, d, "G"))
    return specs


def feature_manifest(config: GraphMetricsConfig = GraphMetricsConfig()) -> list[str]:
    """Ordered feature names; the contract for every graph feature matrix."""
    return [s.name for s in manifest_specs(config)]


BLOCK_SIZE = len(_VERTEX_VARIANTS) * 2 + len(_GLOBAL_VARIANTS)


# ---- feature vector assembly ----


@dataclass
class GraphFeatureVector:
    values: np.ndarray
    missing: np.ndarray  # bool, same length
    names: list[str]


def _graph_block(
    g: ConvGraph, target_author: str, cfg: GraphMetricsConfig
) -> tuple[np.ndarray, np.ndarray]:
    n = g.n_vertices
    values = np.zeros(BLOCK_SIZE)
    missing = np.zeros(BLOCK_SIZE, dtype=bool)
    if n == 0:
        missing[:] = True
        return values, missing
    views = graph_views(g)
    p_du = sp_profile(views.du)
    p_dw = sp_profile(views.dw)
    p_uu = sp_profile(views.uu)
    p_uw = sp_profile(views.uw)

    deg_in, _ = degree_strength(views.du, "in")
    deg_out, _ = degree_strength(views.du, "out")
    deg_u, _ = degree_strength(views.uu)
    _, st_in = degree_strength(views.dw, "in")
    _, st_out = degree_strength(views.dw, "out")
    _, st_u = degree_strength(views.uw)

    hub_u, auth_u = hits(views.du, cfg)
    hub_w, auth_w = hits(views.dw, cfg)

    vertex_vals: dict[tuple[str, str, str], np.ndarray] = {
        ("degree", "-", "I"): deg_in,
        ("degree", "-", "O"): deg_out,
        ("degree", "-", "U"): deg_u,
        ("strength", "W", "I"): st_in,
        ("strength", "W", "O"): st_out,
        ("strength", "W", "U"): st_u,
        ("coreness", "-", "I"): coreness(views.du, "in"),
        ("coreness", "-", "O"): coreness(views.du, "out"),
        ("coreness", "-", "U"): coreness(views.uu),
        ("closeness", "U", "I"): p_du.closeness_in(),
        ("closeness", "U", "O"): p_du.closeness_out(),
        ("closeness", "U", "U"): p_uu.closeness_out(),
        ("closeness", "W", "I"): p_dw.closeness_in(),
        ("closeness", "W", "O"): p_dw.closeness_out(),
        ("closeness", "W", "U"): p_uw.closeness_out(),
        ("eccentricity", "U", "I"): p_du.eccentricity_in(),
        ("eccentricity", "U", "O"): p_du.eccentricity_out(),
        ("eccentricity", "U", "U"): p_uu.eccentricity_out(),
        ("eccentricity", "W", "I"): p_dw.eccentricity_in(),
        ("eccentricity", "W", "O"): p_dw.eccentricity_out(),
        ("eccentricity", "W", "U"): p_uw.eccentricity_out(),
        ("betweenness", "U", "D"): p_du.betweenness,
        ("betweenness", "U", "U"): p_uu.betweenness,
        ("betweenness", "W", "D"): p_dw.betweenness,
        ("betweenness", "W", "U"): p_uw.betweenness,
        ("pagerank", "U", "D"): pagerank(views.du, cfg),
        ("pagerank", "W", "D"): pagerank(views.dw, cfg),
        ("hub", "U", "D"): hub_u,
        ("hub", "W", "D"): hub_w,
        ("authority", "U", "D"): auth_u,
        ("authority", "W", "D"): auth_w,
        ("clustering", "U", "U"): clustering_transitivity(views.uu)[0],
        ("clustering", "W", "U"): clustering_transitivity(views.uw)[0],
    }

    recip, density, _, m = reciprocity_density_counts(views.du)
    diam_u, rad_u = p_uu.diameter_radius()
    diam_w, rad_w = p_uw.diameter_radius()
    _, transitivity = clustering_transitivity(views.uu)
    q_u, _ = modularity(views.uu)
    q_w, _ = modularity(views.uw)
    comp_count, largest_frac, assort = components_assortativity(views.uu)
    global_vals: dict[tuple[str, str, str], float] = {
        ("vertex_count", "-", "-"): float(n),
        ("edge_count", "-", "D"): float(m),
        ("density", "-", "D"): density,
        ("reciprocity", "-", "D"): recip,
        ("diameter", "U", "U"): diam_u,
        ("diameter", "W", "U"): diam_w,
        ("radius", "U", "U"): rad_u,
        ("radius", "W", "U"): rad_w,
        ("avg_path_length", "U", "U"): p_uu.avg_path_length(),
        ("avg_path_length", "W", "U"): p_uw.avg_path_length(),
        ("transitivity", "-", "U"): transitivity,
        ("modularity", "U", "U"): q_u,
        ("modularity", "W", "U"): q_w,
        ("assortativity", "-", "U"): assort,
        ("component_count", "-", "U"): float(comp_count),
        ("largest_component_fraction", "-", "U"): largest_frac,
    }

    ti = g.vertex_index(target_author)
    pos = 0
    for key in _VERTEX_VARIANTS:
        arr = vertex_vals[key]
        if ti is None:
            missing[pos] = True
        else:
            values[pos] = arr[ti]
        values[pos + 1] = float(arr.mean())
        pos += 2
    for key in _GLOBAL_VARIANTS:
        values[pos] = global_vals[key]
        pos += 1
    return values, missing


def compute_feature_vector(
    before: ConvGraph,
    after: ConvGraph,
    full: ConvGraph,
    target_author: str,
    cfg: GraphMetricsConfig = GraphMetricsConfig(),
) -> GraphFeatureVector:
    """Concatenated before/after/full feature blocks in manifest order."""
    blocks = []
    miss = []
    for g in (before, after, full):
        v, m = _graph_block(g, target_author, cfg)
        blocks.append(v)
        miss.append(m)
    return GraphFeatureVector(
        values=np.concatenate(blocks),
        missing=np.concatenate(miss),
        names=feature_manifest(cfg),
    )

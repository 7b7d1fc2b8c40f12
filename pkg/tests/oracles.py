"""Independent brute-force oracles used by the test suite.

Everything here is written from first principles (path enumeration, peeling,
dense linear algebra) so it shares no code path with the package internals.
"""

from __future__ import annotations

import itertools

import numpy as np


def enum_paths_profile(n, adj, directed):
    """Distances, shortest-path counts and betweenness by simple-path enumeration.

    adj: list of dicts j->length (already 1/w for weighted graphs).
    Returns (dist matrix, sigma matrix, betweenness array).
    """
    dist = np.full((n, n), np.inf)
    np.fill_diagonal(dist, 0.0)
    sigma = np.zeros((n, n))
    np.fill_diagonal(sigma, 1.0)
    interior: dict[tuple[int, int], dict[int, float]] = {}

    for s in range(n):
        all_paths = {}  # t -> list of (length, path)
        stack = [(s, 0.0, (s,))]
        while stack:
            u, length, path = stack.pop()
            for v, l in adj[u].items():
                if v in path:
                    continue
                nl = length + l
                np_path = path + (v,)
                all_paths.setdefault(v, []).append((nl, np_path))
                stack.append((v, nl, np_path))
        for t, plist in all_paths.items():
            best = min(p[0] for p in plist)
            winners = [p for p in plist if p[0] == best]
            dist[s, t] = best
            sigma[s, t] = len(winners)
            interior[(s, t)] = {}
            for _, path in winners:
                for v in path[1:-1]:
                    interior[(s, t)][v] = interior[(s, t)].get(v, 0) + 1

    bet = np.zeros(n)
    for (s, t), table in interior.items():
        for v, cnt in table.items():
            bet[v] += cnt / sigma[s, t]
    if not directed:
        bet /= 2.0
    return dist, sigma, bet


def closeness_from_dist(dist):
    n = dist.shape[0]
    out = np.zeros(n)
    for v in range(n):
        finite = np.isfinite(dist[v])
        r = finite.sum()
        if r > 1:
            out[v] = (r - 1) / dist[v][finite].sum()
    return out


def eccentricity_from_dist(dist):
    n = dist.shape[0]
    out = np.zeros(n)
    for v in range(n):
        finite = np.isfinite(dist[v])
        if finite.sum() > 1:
            out[v] = dist[v][finite].max()
    return out


def diameter_radius_from_dist(dist):
    ecc = eccentricity_from_dist(dist)
    reach = np.isfinite(dist).sum(axis=1)
    mask = reach > 1
    if not mask.any():
        return 0.0, 0.0
    return float(ecc[mask].max()), float(ecc[mask].min())


def apl_from_dist(dist):
    n = dist.shape[0]
    vals = [dist[u, v] for u in range(n) for v in range(n) if u != v and np.isfinite(dist[u, v])]
    return float(np.mean(vals)) if vals else 0.0


def coreness_peel(n, adj_deg, adj_removal, degree_of):
    """Coreness by definition: for each k, peel vertices below k and record survivors.

    adj_deg[v]: neighbors defining v's degree; adj_removal[v]: vertices whose
    degree drops when v is removed. degree_of(v, alive) recomputes from scratch.
    """
    core = np.zeros(n, dtype=int)
    for k in range(0, n + 1):
        alive = set(range(n))
        changed = True
        while changed:
            changed = False
            for v in sorted(alive):
                if degree_of(v, alive) < k:
                    alive.discard(v)
                    changed = True
        for v in alive:
            core[v] = k
    return core


def pagerank_solve(W, damping):
    """Dense linear-system PageRank with uniform dangling redistribution."""
    n = W.shape[0]
    out = W.sum(axis=1)
    M = np.zeros_like(W)
    for i in range(n):
        if out[i] > 0:
            M[i] = W[i] / out[i]
        else:
            M[i] = 1.0 / n
    A = np.eye(n) - damping * M.T
    b = np.full(n, (1.0 - damping) / n)
    return np.linalg.solve(A, b)


def hits_eig(W):
    """Principal-eigenspace HITS plus the eigengap ratio of the power iteration.

    Returns (hub, auth, ratio) where ratio = lambda2/lambda1 of W W^T; the
    iterative scheme contracts non-principal components by that factor per
    cycle, so comparisons are only meaningful when ratio**max_iter is far
    below the tolerance.
    """
    n = W.shape[0]
    if not W.any():
        return np.zeros(n), np.zeros(n), 0.0

    def principal(M):
        vals, vecs = np.linalg.eigh(M)
        top = vals[-1]
        ratio = vals[-2] / top if n > 1 and top > 0 else 0.0
        keep = vals > top - 1e-9 * max(1.0, abs(top))
        basis = vecs[:, keep]
        start = np.full(n, 1.0 / np.sqrt(n))
        proj = basis @ (basis.T @ start)
        norm = np.linalg.norm(proj)
        if norm == 0:
            return np.zeros(n), ratio
        proj /= norm
        if proj.sum() < 0:
            proj = -proj
        return proj, ratio

    hub, ratio_h = principal(W @ W.T)
    auth, ratio_a = principal(W.T @ W)
    return hub, auth, max(ratio_h, ratio_a)


def clustering_triples(n, und_adj, weighted):
    """Direct O(n^3) local clustering + transitivity on an undirected view."""
    local = np.zeros(n)
    closed = 0
    triples = 0
    wmax = max((w for nb in und_adj for w in nb.values()), default=0.0)
    for v in range(n):
        nbrs = sorted(und_adj[v])
        k = len(nbrs)
        triples += k * (k - 1) // 2
        if k < 2:
            continue
        links = 0
        acc = 0.0
        for a, b in itertools.combinations(nbrs, 2):
            if b in und_adj[a]:
                links += 1
                if weighted:
                    acc += (
                        (und_adj[v][a] / wmax) * (und_adj[v][b] / wmax) * (und_adj[a][b] / wmax)
                    ) ** (1 / 3)
        closed += links
        if weighted:
            local[v] = 2 * acc / (k * (k - 1))
        else:
            local[v] = 2 * links / (k * (k - 1))
    trans = closed / triples if triples else 0.0
    return local, trans


def modularity_direct(n, und_adj, membership):
    """Q from the definition, summing over vertex pairs."""
    m = sum(w for nb in und_adj for w in nb.values()) / 2.0
    if m == 0:
        return 0.0
    k = [sum(nb.values()) for nb in und_adj]
    q = 0.0
    for i in range(n):
        for j in range(n):
            if membership[i] != membership[j]:
                continue
            a_ij = und_adj[i].get(j, 0.0)
            q += a_ij - k[i] * k[j] / (2.0 * m)
    return q / (2.0 * m)


def assortativity_direct(n, und_adj):
    deg = {v: len(und_adj[v]) for v in range(n)}
    xs, ys = [], []
    for i in range(n):
        for j in und_adj[i]:
            xs.append(deg[i])
            ys.append(deg[j])
    if not xs:
        return 0.0
    x = np.array(xs, dtype=float)
    y = np.array(ys, dtype=float)
    if x.std() == 0 or y.std() == 0:
        return 0.0
    return float(((x - x.mean()) * (y - y.mean())).mean() / (x.std() * y.std()))


def components_direct(n, und_adj):
    seen = set()
    sizes = []
    for s in range(n):
        if s in seen:
            continue
        comp = {s}
        frontier = [s]
        while frontier:
            u = frontier.pop()
            for v in und_adj[u]:
                if v not in comp:
                    comp.add(v)
                    frontier.append(v)
        seen |= comp
        sizes.append(len(comp))
    return len(sizes), (max(sizes) / n if sizes else 0.0)


def random_digraph(seed, max_n=7):
    """Seeded random weighted digraph (no self-loops, continuous weights)."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, max_n + 1))
    p = float(rng.uniform(0.15, 0.5))
    edges = {}
    for i in range(n):
        for j in range(n):
            if i != j and rng.random() < p:
                edges[(i, j)] = float(rng.uniform(0.2, 2.5))
    return n, edges


def svm_primal_objective(X, y, C, w, b):
    margins = y * (X @ w + b)
    hinge = np.maximum(0.0, 1.0 - margins)
    return 0.5 * float(w @ w) + C * float(hinge.sum())


def svm_qp_oracle(X, y, C):
    """Reference soft-margin linear SVM via cvxopt QP on the dual."""
    from cvxopt import matrix, solvers

    n = X.shape[0]
    K = X @ X.T
    Q = (y[:, None] * y[None, :]) * K
    P = matrix(Q + 1e-10 * np.eye(n))
    q = matrix(-np.ones(n))
    G = matrix(np.vstack([np.eye(n), -np.eye(n)]))
    h = matrix(np.concatenate([np.full(n, C), np.zeros(n)]))
    A = matrix(y.astype(float), (1, n))
    bq = matrix(0.0)
    solvers.options["show_progress"] = False
    solvers.options["abstol"] = 1e-12
    solvers.options["reltol"] = 1e-12
    solvers.options["feastol"] = 1e-12
    sol = solvers.qp(P, q, G, h, A, bq)
    alpha = np.array(sol["x"]).ravel()
    w = X.T @ (alpha * y)
    # optimal intercept for this w: exact search over hinge breakpoints
    cand = y - X @ w
    best_b, best_obj = 0.0, np.inf
    for b in np.concatenate([cand, [0.0]]):
        obj = svm_primal_objective(X, y, C, w, b)
        if obj < best_obj:
            best_obj, best_b = obj, b
    return w, best_b, best_obj

"""Centrality measures, their correlations, clustering and path statistics.

Shortest-path measures default to hop counts. Passing ``weighted=True`` uses
1/w as the length of an edge of weight w instead.
"""
from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConvergenceError, GraphError
from .graph import InfluenceGraph

METRICS = ("degree", "betweenness", "closeness", "eigenvector", "katz")


def degree_centrality(g: InfluenceGraph) -> dict:
    n = g.n
    if n <= 1:
        return {v: 0.0 for v in g.node_ids}
    return {v: g.degree(i) / (n - 1) for i, v in enumerate(g.node_ids)}


def _sssp(g: InfluenceGraph, s: int, weighted: bool):
    """Single-source shortest paths with path counts.

    Returns (order of settled nodes, predecessor lists, sigma, dist).
    """
    n = g.n
    pred = [[] for _ in range(n)]
    sigma = [0] * n
    sigma[s] = 1
    dist = [math.inf] * n
    dist[s] = 0
    order = []
    if not weighted:
        q = deque([s])
        while q:
            u = q.popleft()
            order.append(u)
            for v in sorted(g.adj[u]):
                if dist[v] == math.inf:
                    dist[v] = dist[u] + 1
                    q.append(v)
                if dist[v] == dist[u] + 1:
                    sigma[v] += sigma[u]
                    pred[v].append(u)
        return order, pred, sigma, dist

    done = [False] * n
    heap = [(0.0, s, s)]
    seen = {s: 0.0}
    while heap:
        d, _, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        dist[u] = d
        order.append(u)
        for v in sorted(g.adj[u]):
            nd = d + 1.0 / g.adj[u][v]
            if done[v]:
                continue
            if v not in seen or nd < seen[v]:
                seen[v] = nd
                sigma[v] = sigma[u]
                pred[v] = [u]
                heapq.heappush(heap, (nd, v, v))
            elif nd == seen[v]:
                sigma[v] += sigma[u]
                pred[v].append(u)
    return order, pred, sigma, dist


def betweenness_centrality(g: InfluenceGraph, weighted: bool = False) -> dict:
    """Brandes accumulation, normalized to [0, 1] by (n-1)(n-2)/2 unordered pairs."""
    n = g.n
    cb = [0.0] * n
    for s in range(n):
        order, pred, sigma, _ = _sssp(g, s, weighted)
        delta = [0.0] * n
        for w in reversed(order):
            for v in pred[w]:
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w])
            if w != s:
                cb[w] += delta[w]
    if n <= 2:
        return {v: 0.0 for v in g.node_ids}
    # every unordered pair was counted from both ends
    scale = 1.0 / ((n - 1) * (n - 2))
    return {v: cb[i] * scale for i, v in enumerate(g.node_ids)}


def closeness_centrality(g: InfluenceGraph, weighted: bool = False) -> dict:
    """Reachability-scaled closeness: (r / (n-1)) * (r / sum of distances)."""
    n = g.n
    out = {}
    for i, v in enumerate(g.node_ids):
        _, _, _, dist = _sssp(g, i, weighted)
        reach = [d for j, d in enumerate(dist) if j != i and d != math.inf]
        r, total = len(reach), sum(reach)
        out[v] = (r / (n - 1)) * (r / total) if r and total > 0 else 0.0
    return out


def _power_iteration(A: np.ndarray, tol: float, max_iter: int) -> np.ndarray:
    n = A.shape[0]
    x = np.full(n, 1.0 / math.sqrt(n))
    for it in range(1, max_iter + 1):
        y = A @ x
        ny = np.linalg.norm(y)
        if ny == 0:
            raise ConvergenceError("adjacency annihilates the iterate", it)
        # half-step blend removes the +/- lambda oscillation of bipartite graphs
        y = 0.5 * (x + y / ny)
        y /= np.linalg.norm(y)
        if np.max(np.abs(y - x)) < tol:
            return y
        x = y
    raise ConvergenceError("eigenvector power iteration did not converge", max_iter)


def eigenvector_centrality(g: InfluenceGraph, tol: float = 1e-8, max_iter: int = 1000) -> dict:
    """Principal eigenvector of the weighted adjacency, unit L2 norm, nonnegative."""
    if g.edge_count == 0:
        raise GraphError("eigenvector centrality needs at least one edge")
    x = _power_iteration(g.adjacency_matrix(), tol, max_iter)
    isolated = np.array(g.degrees()) == 0
    x[isolated] = 0.0
    x = np.abs(x)
    x /= np.linalg.norm(x)
    return dict(zip(g.node_ids, x.tolist()))


def spectral_radius(g: InfluenceGraph, tol: float = 1e-12, max_iter: int = 10000) -> float:
    """Largest adjacency eigenvalue via the Rayleigh quotient of the power-iteration vector."""
    if g.edge_count == 0:
        return 0.0
    A = g.adjacency_matrix()
    x = _power_iteration(A, tol, max_iter)
    return float(x @ A @ x)


def katz_centrality(g: InfluenceGraph, alpha: Optional[float] = None, beta: float = 1.0,
                    tol: float = 1e-10, max_iter: int = 5000) -> dict:
    """Fixed point of x = alpha A x + beta 1, L2-normalized.

    ``alpha`` defaults to 0.9 / lambda_max and must stay below 1 / lambda_max.
    """
    A = g.adjacency_matrix()
    n = g.n
    lam = spectral_radius(g)
    if alpha is None:
        alpha = 0.9 / lam if lam > 0 else 0.0
    if lam > 0 and alpha * lam >= 1.0:
        raise ConvergenceError(
            f"alpha={alpha} >= 1/lambda_max={1 / lam}; Katz series diverges", 0)
    b = np.full(n, float(beta))
    x = b.copy()
    for it in range(1, max_iter + 1):
        y = alpha * (A @ x) + b
        if np.max(np.abs(y - x)) < tol:
            x = y
            break
        x = y
    else:
        raise ConvergenceError("Katz iteration did not converge", max_iter)
    x = x / np.linalg.norm(x)
    return dict(zip(g.node_ids, x.tolist()))


def katz_alpha_default(g: InfluenceGraph) -> float:
    lam = spectral_radius(g)
    return 0.9 / lam if lam > 0 else 0.0


@dataclass
class CentralityTable:
    node_ids: list
    columns: dict  # metric name -> np.ndarray aligned with node_ids

    def row(self, node_id) -> dict:
        i = self.node_ids.index(node_id)
        return {m: float(self.columns[m][i]) for m in METRICS}

    def matrix(self) -> np.ndarray:
        return np.column_stack([self.columns[m] for m in METRICS])

    def top(self, metric: str, k: int = 5) -> list[tuple]:
        col = self.columns[metric]
        order = sorted(range(len(col)), key=lambda i: (-col[i], self.node_ids[i]))
        return [(self.node_ids[i], float(col[i])) for i in order[:k]]

    def __len__(self):
        return len(self.node_ids)


def centrality_table(g: InfluenceGraph, weighted_paths: bool = False,
                     katz_alpha: Optional[float] = None, katz_beta: float = 1.0) -> CentralityTable:
    """All five centralities. An edgeless graph gets zero eigenvector centrality."""
    ids = g.node_ids
    cols = {
        "degree": degree_centrality(g),
        "betweenness": betweenness_centrality(g, weighted=weighted_paths),
        "closeness": closeness_centrality(g, weighted=weighted_paths),
        "eigenvector": (eigenvector_centrality(g) if g.edge_count
                        else {v: 0.0 for v in ids}),
        "katz": katz_centrality(g, alpha=katz_alpha, beta=katz_beta),
    }
    return CentralityTable(list(ids), {m: np.array([cols[m][v] for v in ids]) for m in METRICS})


def pearson_correlation_matrix(table) -> tuple[np.ndarray, list]:
    """Pearson r between columns; returns (matrix, names of zero-variance columns).

    A zero-variance column correlates 0 with every other column.
    """
    X = table.matrix() if isinstance(table, CentralityTable) else np.asarray(table, dtype=float)
    rows, k = X.shape
    if rows < 2:
        raise GraphError("correlation needs at least 2 rows")
    C = X - X.mean(axis=0)
    ss = np.sqrt((C ** 2).sum(axis=0))
    const = [c for c in range(k) if ss[c] <= 1e-15 * max(1.0, np.abs(X[:, c]).max())]
    R = np.eye(k)
    for a in range(k):
        for b in range(a + 1, k):
            if a in const or b in const:
                r = 0.0
            else:
                r = float(np.dot(C[:, a], C[:, b]) / (ss[a] * ss[b]))
                r = max(-1.0, min(1.0, r))
            R[a, b] = R[b, a] = r
    names = list(METRICS) if isinstance(table, CentralityTable) else list(range(k))
    return R, [names[c] for c in const]


def local_clustering(g: InfluenceGraph) -> list[float]:
    out = []
    for i in range(g.n):
        nbrs = sorted(g.adj[i])
        d = len(nbrs)
        if d < 2:
            out.append(0.0)
            continue
        tri = sum(1 for a in range(d) for b in range(a + 1, d) if nbrs[b] in g.adj[nbrs[a]])
        out.append(2.0 * tri / (d * (d - 1)))
    return out


def average_clustering(g: InfluenceGraph) -> float:
    if g.n == 0:
        return 0.0
    return sum(local_clustering(g)) / g.n


def average_shortest_path(g: InfluenceGraph, component=None, weighted: bool = False) -> float:
    """Mean shortest-path length over unordered pairs of a connected node set."""
    nodes = g.node_ids if component is None else component
    sub = g.subgraph(nodes)
    if sub.n < 2:
        raise GraphError("component too small for path statistics")
    total = 0.0
    for s in range(sub.n):
        _, _, _, dist = _sssp(sub, s, weighted)
        if any(d == math.inf for d in dist):
            raise GraphError("component is not connected")
        total += sum(dist)
    return total / (sub.n * (sub.n - 1))

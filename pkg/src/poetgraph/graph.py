"""Sparse weighted undirected influence graph and structural primitives."""
from __future__ import annotations

import bisect
import statistics
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import GraphError
from .similarity import SimilarityMatrix


class InfluenceGraph:
    """Undirected weighted graph over an ordered list of node ids.

    Nodes are addressed by index; ``edges`` holds ``(i, j, w)`` with ``i < j``
    in lexicographic order.
    """

    def __init__(self, node_ids: Sequence[str], edges=()):
        self.node_ids = list(node_ids)
        if len(set(self.node_ids)) != len(self.node_ids):
            raise GraphError("duplicate node ids")
        self.index = {v: i for i, v in enumerate(self.node_ids)}
        n = len(self.node_ids)
        self.adj = [dict() for _ in range(n)]
        for i, j, w in edges:
            i, j = (i, j) if i < j else (j, i)
            if i == j:
                raise GraphError(f"self-loop on node {self.node_ids[i]!r}")
            if not 0 <= i < n or not 0 <= j < n:
                raise GraphError(f"edge ({i}, {j}) out of range")
            if j in self.adj[i]:
                raise GraphError(f"duplicate edge {self.node_ids[i]!r}-{self.node_ids[j]!r}")
            w = float(w)
            if not w > 0:
                raise GraphError("edge weights must be positive")
            self.adj[i][j] = w
            self.adj[j][i] = w
        self.edges = sorted((i, j, w) for i in range(n) for j, w in self.adj[i].items() if i < j)
        self.m = sum(w for _, _, w in self.edges)

    @classmethod
    def from_id_edges(cls, node_ids, id_edges):
        index = {v: i for i, v in enumerate(node_ids)}
        return cls(node_ids, [(index[a], index[b], w) for a, b, w in id_edges])

    @property
    def n(self) -> int:
        return len(self.node_ids)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def degree(self, i: int) -> int:
        return len(self.adj[i])

    def degrees(self) -> list[int]:
        return [len(a) for a in self.adj]

    def weighted_degrees(self) -> np.ndarray:
        return np.array([sum(a.values()) for a in self.adj], dtype=float)

    def neighbors(self, i: int):
        return sorted(self.adj[i])

    def adjacency_matrix(self) -> np.ndarray:
        A = np.zeros((self.n, self.n))
        for i, j, w in self.edges:
            A[i, j] = A[j, i] = w
        return A

    def scaled(self, factor: float) -> "InfluenceGraph":
        return InfluenceGraph(self.node_ids, [(i, j, w * factor) for i, j, w in self.edges])

    def subgraph(self, nodes) -> "InfluenceGraph":
        keep = sorted(self.index[v] if isinstance(v, str) else v for v in nodes)
        remap = {old: new for new, old in enumerate(keep)}
        edges = [(remap[i], remap[j], w) for i, j, w in self.edges if i in remap and j in remap]
        return InfluenceGraph([self.node_ids[i] for i in keep], edges)

    def __repr__(self):
        return f"InfluenceGraph(n={self.n}, E={self.edge_count}, m={self.m:.6g})"


def build_graph(fused: SimilarityMatrix, threshold: float = 0.0,
                top_k: Optional[int] = None) -> InfluenceGraph:
    """Keep pair (i, j) when fused[i, j] >= threshold and, if ``top_k`` is set,
    j is among i's top_k most similar poets or vice versa.

    Zero-similarity pairs never become edges.
    """
    if not 0.0 <= threshold <= 1.0:
        raise GraphError(f"threshold {threshold} outside [0, 1]")
    V = fused.values
    n = V.shape[0]
    allowed = None
    if top_k is not None:
        if top_k < 1:
            raise GraphError("top_k must be positive")
        allowed = np.zeros((n, n), dtype=bool)
        for i in range(n):
            others = [j for j in range(n) if j != i]
            others.sort(key=lambda j: (-V[i, j], j))
            for j in others[:top_k]:
                allowed[i, j] = True
        allowed = allowed | allowed.T
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            w = V[i, j]
            if w >= threshold and w > 0 and (allowed is None or allowed[i, j]):
                edges.append((i, j, float(w)))
    return InfluenceGraph(fused.poet_ids, edges)


def calibrate_threshold(fused: SimilarityMatrix, target_density: float = 0.083) -> float:
    """Threshold whose resulting density is closest to ``target_density``.

    Density is a step function of the threshold, so the search runs over the
    sorted distinct off-diagonal values; ties resolve to the larger threshold.
    """
    V = fused.values
    n = V.shape[0]
    if n < 2:
        return 0.0
    iu = np.triu_indices(n, 1)
    vals = np.sort(V[iu])
    vals = vals[vals > 0]
    if len(vals) == 0:
        return 0.0
    pairs = n * (n - 1) / 2
    target_edges = target_density * pairs
    candidates = np.unique(vals)

    def edges_at(t):
        return len(vals) - bisect.bisect_left(vals, t)

    # edges_at is nonincreasing in t: bisect for the first candidate with edges <= target
    lo, hi = 0, len(candidates) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if edges_at(candidates[mid]) <= target_edges:
            hi = mid
        else:
            lo = mid + 1
    best = candidates[lo]
    if lo > 0:
        below = candidates[lo - 1]
        if abs(edges_at(below) - target_edges) < abs(edges_at(best) - target_edges):
            best = below
    return float(best)


def connected_components(g: InfluenceGraph) -> list[set]:
    seen = [False] * g.n
    comps = []
    for s in range(g.n):
        if seen[s]:
            continue
        seen[s] = True
        stack, comp = [s], []
        while stack:
            u = stack.pop()
            comp.append(u)
            for v in g.adj[u]:
                if not seen[v]:
                    seen[v] = True
                    stack.append(v)
        comps.append({g.node_ids[u] for u in comp})
    comps.sort(key=lambda c: (-len(c), min(c)))
    return comps


@dataclass(frozen=True)
class DegreeStats:
    min: int
    max: int
    mean: float
    median: float
    std: float

    def as_dict(self):
        return dict(min=self.min, max=self.max, mean=self.mean, median=self.median, std=self.std)


def degree_stats(g: InfluenceGraph) -> DegreeStats:
    d = sorted(g.degrees())
    if not d:
        return DegreeStats(0, 0, 0.0, 0.0, 0.0)
    n = len(d)
    mean = 2 * g.edge_count / n
    return DegreeStats(min=d[0], max=d[-1], mean=mean, median=float(d[(n - 1) // 2]),
                       std=statistics.pstdev(d))


def edge_weight_histogram(g: InfluenceGraph, bin_count: int = 40) -> list[tuple]:
    """Uniform bins over [min_w, max_w], half-open except the closed last bin."""
    if bin_count < 1:
        raise GraphError("bin_count must be positive")
    w = np.array([e[2] for e in g.edges])
    if len(w) == 0:
        return []
    lo, hi = float(w.min()), float(w.max())
    if lo == hi:
        return [(lo, hi, 0)] * (bin_count - 1) + [(lo, hi, len(w))]
    counts, edges = np.histogram(w, bins=bin_count, range=(lo, hi))
    return [(float(edges[k]), float(edges[k + 1]), int(counts[k])) for k in range(bin_count)]


def degree_histogram(g: InfluenceGraph) -> list[tuple]:
    """(degree, number of nodes) for every degree from 0 to the maximum."""
    d = g.degrees()
    top = max(d, default=-1)
    counts = np.bincount(np.array(d, dtype=int), minlength=top + 1) if d else []
    return [(k, int(c)) for k, c in enumerate(counts)]


def density(g: InfluenceGraph) -> float:
    n = g.n
    if n <= 1:
        return 0.0
    return 2 * g.edge_count / (n * (n - 1))

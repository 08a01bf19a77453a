"""Modularity, Louvain community detection and an exhaustive small-graph oracle."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import GraphError
from .graph import InfluenceGraph


@dataclass
class CommunityPartition:
    assignment: dict          # node id -> community id (0 = largest)
    modularity: float
    levels: list = field(default_factory=list)
    sweeps: list = field(default_factory=list)   # (level, Q before, Q after) per local-move sweep

    def labels(self, node_ids) -> list[int]:
        return [self.assignment[v] for v in node_ids]

    def communities(self) -> list[list]:
        groups = {}
        for v, c in self.assignment.items():
            groups.setdefault(c, []).append(v)
        return [sorted(groups[c]) for c in sorted(groups)]

    @property
    def count(self) -> int:
        return len(set(self.assignment.values()))


def compact_labels(labels: Sequence[int]) -> list[int]:
    """Relabel communities 0..K-1 by descending size, ties by smallest member index."""
    groups = {}
    for i, c in enumerate(labels):
        groups.setdefault(c, []).append(i)
    order = sorted(groups.values(), key=lambda g: (-len(g), g[0]))
    out = [0] * len(labels)
    for new, members in enumerate(order):
        for i in members:
            out[i] = new
    return out


def _modularity_dense(A: np.ndarray, labels) -> float:
    k = A.sum(axis=1)
    two_m = k.sum()
    if two_m <= 0:
        raise GraphError("modularity undefined on edgeless graph")
    labels = np.asarray(labels)
    q = 0.0
    for c in np.unique(labels):
        idx = np.flatnonzero(labels == c)
        intra = A[np.ix_(idx, idx)].sum(axis=1).sum()
        tot = k[idx].sum()
        q += intra / two_m - (tot / two_m) ** 2
    return float(q)


def modularity(g: InfluenceGraph, partition) -> float:
    """Newman modularity with weighted degrees; ``partition`` maps node id -> label
    or is a label sequence aligned with ``g.node_ids``."""
    if isinstance(partition, CommunityPartition):
        partition = partition.assignment
    if isinstance(partition, dict):
        missing = [v for v in g.node_ids if v not in partition]
        if missing:
            raise GraphError(f"partition does not cover nodes {missing}")
        labels = [partition[v] for v in g.node_ids]
    else:
        labels = list(partition)
        if len(labels) != g.n:
            raise GraphError("partition length does not match node count")
    return _modularity_dense(g.adjacency_matrix(), labels)


class _Level:
    """Weighted graph (possibly with self-loops) used inside Louvain."""

    def __init__(self, n, nbrs, self_loops):
        self.n = n
        self.nbrs = nbrs                  # list of {j: w}, j != i
        self.self_loops = self_loops      # A_ii (already doubled convention)
        self.k = np.array([sum(nbrs[i].values()) + self_loops[i] for i in range(n)])
        self.two_m = float(self.k.sum())

    def dense(self):
        A = np.diag(np.asarray(self.self_loops, dtype=float))
        for i, row in enumerate(self.nbrs):
            for j, w in row.items():
                A[i, j] = w
        return A

    def aggregate(self, labels, count):
        nbrs = [dict() for _ in range(count)]
        loops = [0.0] * count
        for i in range(self.n):
            ci = labels[i]
            loops[ci] += self.self_loops[i]
            for j, w in sorted(self.nbrs[i].items()):
                cj = labels[j]
                if ci == cj:
                    loops[ci] += w
                else:
                    nbrs[ci][cj] = nbrs[ci].get(cj, 0.0) + w
        return _Level(count, nbrs, loops)


def _local_moves(level: _Level, order, min_gain):
    """One Louvain phase 1 on ``level``; returns (labels, moved_any, sweep Q pairs)."""
    n = level.n
    labels = list(range(n))
    tot = level.k.astype(float).copy()
    m = level.two_m / 2.0
    A = level.dense()
    sweeps = []
    moved_any = False
    while True:
        q_before = _modularity_dense(A, labels)
        improved = False
        for i in order:
            ci = labels[i]
            ki = level.k[i]
            links = {}
            for j, w in level.nbrs[i].items():
                links[labels[j]] = links.get(labels[j], 0.0) + w
            tot[ci] -= ki
            # gain of inserting the (now isolated) node i into community c
            stay = links.get(ci, 0.0) / m - tot[ci] * ki / (2.0 * m * m)
            best_c, best_gain = ci, 0.0
            for c in sorted(links):
                if c == ci:
                    continue
                dq = links[c] / m - tot[c] * ki / (2.0 * m * m) - stay
                # ascending scan + strict '>' keeps the smallest id on ties
                if dq > min_gain and dq > best_gain:
                    best_c, best_gain = c, dq
            tot[best_c] += ki
            if best_c != ci:
                labels[i] = best_c
                improved = True
                moved_any = True
        q_after = _modularity_dense(A, labels)
        sweeps.append((q_before, q_after))
        if q_after < q_before - max(min_gain, 1e-12) * n:
            raise RuntimeError(f"modularity decreased during a sweep: {q_before} -> {q_after}")
        if not improved:
            break
    return labels, moved_any, sweeps


def louvain(g: InfluenceGraph, seed: int = 0, min_gain: float = 1e-12) -> CommunityPartition:
    """Two-phase Louvain: greedy local moves, then aggregation, until stable.

    Node visit order is ascending index (seed 0) or a seeded permutation of it,
    drawn fresh for each aggregation level.
    """
    if g.m <= 0:
        raise GraphError("modularity undefined on edgeless graph")
    rng = np.random.default_rng(seed) if seed else None
    level = _Level(g.n, [dict(a) for a in g.adj], [0.0] * g.n)
    membership = list(range(g.n))
    levels, sweeps = [], []
    depth = 0
    while True:
        order = list(range(level.n)) if rng is None else [int(x) for x in rng.permutation(level.n)]
        labels, moved, level_sweeps = _local_moves(level, order, min_gain)
        sweeps.extend((depth, a, b) for a, b in level_sweeps)
        if not moved:
            break
        compact = compact_labels(labels)
        count = max(compact) + 1
        membership = [compact[c] for c in membership]
        levels.append({v: membership[i] for i, v in enumerate(g.node_ids)})
        if count == level.n:
            break
        level = level.aggregate(compact, count)
        depth += 1
    final = compact_labels(membership)
    assignment = {v: final[i] for i, v in enumerate(g.node_ids)}
    return CommunityPartition(assignment, modularity(g, assignment), levels, sweeps)


def _restricted_growth_strings(n):
    """All set partitions of n items as canonical label lists, lexicographic order."""
    if n == 0:
        yield []
        return
    a = [0] * n

    def rec(i, top):
        if i == n:
            yield list(a)
            return
        for c in range(top + 2):
            a[i] = c
            yield from rec(i + 1, max(top, c))

    a[0] = 0
    yield from rec(1, 0)


def brute_force_best_partition(g: InfluenceGraph, max_nodes: int = 10) -> CommunityPartition:
    """Exhaustive modularity maximization over all set partitions (n <= 10)."""
    if g.n > max_nodes:
        raise GraphError(f"brute force limited to {max_nodes} nodes, got {g.n}")
    A = g.adjacency_matrix()
    k = A.sum(axis=1)
    two_m = k.sum()
    if two_m <= 0:
        raise GraphError("modularity undefined on edgeless graph")
    best, best_q = None, -np.inf
    for labels in _restricted_growth_strings(g.n):
        lab = np.asarray(labels)
        K = max(labels) + 1
        S = np.zeros((g.n, K))
        S[np.arange(g.n), lab] = 1.0
        intra = np.einsum("ic,ij,jc->", S, A, S)
        tot = k @ S
        q = intra / two_m - float((tot / two_m) @ (tot / two_m))
        if q > best_q + 1e-12:
            best, best_q = labels, q
    final = compact_labels(best)
    assignment = {v: final[i] for i, v in enumerate(g.node_ids)}
    return CommunityPartition(assignment, modularity(g, assignment))

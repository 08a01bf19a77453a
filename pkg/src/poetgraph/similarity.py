"""Poet-by-poet similarity matrices (five dimensions) and their fusion."""
from __future__ import annotations

import math
import warnings
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .corpus import Corpus, poet_tokens
from .errors import SimilarityError
from .features import TermDocMatrix, WordEmbeddingTable

DIMENSIONS = ("semantic", "stylistic", "thematic", "meter", "lexical")


@dataclass
class SimilarityMatrix:
    poet_ids: list
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        n = len(self.poet_ids)
        if self.values.shape != (n, n):
            raise SimilarityError(f"matrix shape {self.values.shape} does not match {n} poets")

    def check(self) -> None:
        """Raise unless symmetric, unit-diagonal, finite and within [0, 1]."""
        v = self.values
        if not np.all(np.isfinite(v)):
            raise SimilarityError("non-finite similarity values")
        if not np.array_equal(v, v.T):
            raise SimilarityError("similarity matrix is not symmetric")
        if not np.all(np.diag(v) == 1.0):
            raise SimilarityError("similarity diagonal must be 1")
        if v.min(initial=0.0) < 0.0 or v.max(initial=0.0) > 1.0:
            raise SimilarityError("similarity values outside [0, 1]")


def _from_pairs(poet_ids, pair_fn) -> SimilarityMatrix:
    """Evaluate ``pair_fn(i, j)`` once per unordered pair and mirror it."""
    n = len(poet_ids)
    M = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            v = min(1.0, max(0.0, float(pair_fn(i, j))))
            M[i, j] = M[j, i] = v
    return SimilarityMatrix(list(poet_ids), M)


def cosine(u, v) -> float:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise SimilarityError(f"length mismatch: {u.shape} vs {v.shape}")
    nu = math.sqrt(float(np.dot(u, u)))
    nv = math.sqrt(float(np.dot(v, v)))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return max(-1.0, min(1.0, float(np.dot(u, v)) / (nu * nv)))


# ---------------------------------------------------------------------------
# Semantic
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SemanticParams:
    freq_blend: float = 0.5
    jaccard_blend: float = 0.5
    scale_k: float = 3.0
    top_n_vocab: int = 2000

    def __post_init__(self):
        if not (0 <= self.freq_blend <= 1 and 0 <= self.jaccard_blend <= 1):
            raise SimilarityError("blend parameters must lie in [0, 1]")
        if self.scale_k <= 0 or self.top_n_vocab < 1:
            raise SimilarityError("scale_k and top_n_vocab must be positive")


@dataclass
class PoetVocab:
    """A poet's top-N vocabulary with relative frequencies and unit embeddings."""
    poet_id: str
    freqs: dict                       # token -> relative frequency
    embedded: list = field(default_factory=list)
    unit_vectors: Optional[np.ndarray] = None


def poet_vocab(poet_id: str, tokens: Sequence[str], emb: WordEmbeddingTable,
               top_n: int) -> PoetVocab:
    counts = Counter(tokens)
    total = sum(counts.values())
    top = sorted(counts, key=lambda t: (-counts[t], t))[:top_n]
    freqs = {t: counts[t] / total for t in top}
    embedded = sorted(t for t in top if t in emb)
    unit = None
    if embedded:
        E = np.vstack([emb[t] for t in embedded])
        norms = np.linalg.norm(E, axis=1)
        norms[norms == 0] = 1.0
        unit = E / norms[:, None]
    return PoetVocab(poet_id, freqs, embedded, unit)


def contrast(raw: float, k: float) -> float:
    """Exponential contrast map on [0, 1]; fixes 0 and 1, monotone increasing."""
    return math.expm1(k * raw) / math.expm1(k)


def _directed_max_mean(a: PoetVocab, b: PoetVocab, idf: dict) -> float:
    sims = np.clip(a.unit_vectors @ b.unit_vectors.T, 0.0, 1.0)
    best = sims.max(axis=1)
    weights = np.array([idf[w] for w in a.embedded])
    wsum = float(weights.sum())
    if wsum == 0.0:
        return float(best.mean())
    return float(np.dot(weights, best)) / wsum


def semantic_pair(a: PoetVocab, b: PoetVocab, idf: dict,
                  params: SemanticParams = SemanticParams()) -> float:
    """Idf-weighted max-cosine alignment, modulated by frequency balance and overlap."""
    for v in (a, b):
        if not v.embedded:
            raise SimilarityError(f"poet {v.poet_id!r} has no embedded vocabulary")
    base = 0.5 * (_directed_max_mean(a, b, idf) + _directed_max_mean(b, a, idf))

    shared = sorted(set(a.freqs) & set(b.freqs))
    if shared:
        fs = sum((min(a.freqs[w], b.freqs[w]) / max(a.freqs[w], b.freqs[w])) ** 2
                 for w in shared) / len(shared)
    else:
        fs = 0.0
    union = len(set(a.freqs) | set(b.freqs))
    jac = len(shared) / union

    g, d = params.freq_blend, params.jaccard_blend
    raw = base * (g + (1 - g) * fs) * (d + (1 - d) * jac)
    return contrast(min(1.0, max(0.0, raw)), params.scale_k)


def semantic_matrix(corpus: Corpus, emb: WordEmbeddingTable, idf: dict,
                    params: SemanticParams = SemanticParams()) -> SimilarityMatrix:
    vocabs = [poet_vocab(p.poet_id, poet_tokens(p), emb, params.top_n_vocab)
              for p in corpus.poets]
    missing = [v.poet_id for v in vocabs if not v.embedded]
    if missing:
        warnings.warn(f"semantic: no embedded vocabulary for {missing}; similarity set to 0")

    def pair(i, j):
        if not vocabs[i].embedded or not vocabs[j].embedded:
            return 0.0
        return semantic_pair(vocabs[i], vocabs[j], idf, params)

    return _from_pairs(corpus.poet_ids, pair)


# ---------------------------------------------------------------------------
# Stylistic / thematic (vector-space dimensions)
# ---------------------------------------------------------------------------

def _distances(x, y):
    diff = x - y
    return math.sqrt(float(np.dot(diff, diff))), float(np.abs(diff).sum())


def stylistic_matrix(poet_ids, vectors) -> SimilarityMatrix:
    X = np.asarray(vectors, dtype=float)
    if X.ndim != 2 or X.shape[1] == 0:
        raise SimilarityError("stylistic vectors need at least one component")

    def pair(i, j):
        x, y = X[i], X[j]
        c = 1.0 if np.array_equal(x, y) else cosine(x, y)
        de, dm = _distances(x, y)
        return 0.5 * (c + 1) / 2 + 0.25 / (1 + de) + 0.25 / (1 + dm)

    return _from_pairs(poet_ids, pair)


def bray_curtis_similarity(x, y) -> float:
    den = float(np.sum(x + y))
    if den == 0.0:
        return 1.0 if np.array_equal(x, y) else 0.0
    return 1.0 - float(np.abs(x - y).sum()) / den


def thematic_matrix(poet_ids, vectors, present=None) -> SimilarityMatrix:
    """Squared-term blend 0.5 cos + 0.2 euclid + 0.2 manhattan + 0.1 Bray-Curtis.

    Bray-Curtis runs on vectors shifted per dimension by the minimum over the
    present poets so every coordinate is nonnegative. Poets flagged absent
    score 0 against everyone else.
    """
    X = np.asarray(vectors, dtype=float)
    n = X.shape[0]
    present = np.ones(n, dtype=bool) if present is None else np.asarray(present, dtype=bool)
    shifted = X.copy()
    if present.any():
        shifted = X - X[present].min(axis=0)

    def pair(i, j):
        if not (present[i] and present[j]):
            return 0.0
        x, y = X[i], X[j]
        if np.array_equal(x, y):
            # every term is 1; summing 0.5+0.2+0.2+0.1 in floats would give 1 - 1ulp
            return 1.0
        c = max(cosine(x, y), 0.0)
        de, dm = _distances(x, y)
        b = bray_curtis_similarity(shifted[i], shifted[j])
        return 0.5 * c ** 2 + 0.2 / (1 + de) ** 2 + 0.2 / (1 + dm) ** 2 + 0.1 * b ** 2

    return _from_pairs(poet_ids, pair)


# ---------------------------------------------------------------------------
# Meter / lexical
# ---------------------------------------------------------------------------

def meter_matrix(poet_ids, profiles: Sequence[Counter]) -> SimilarityMatrix:
    labels = sorted(set().union(*profiles)) if profiles else []
    index = {lab: i for i, lab in enumerate(labels)}
    V = np.zeros((len(profiles), len(labels)))
    for r, prof in enumerate(profiles):
        for lab, cnt in prof.items():
            V[r, index[lab]] = cnt
    return _from_pairs(poet_ids, lambda i, j: cosine(V[i], V[j]))


def lexical_matrix(tdm: TermDocMatrix) -> SimilarityMatrix:
    rows = tdm.rows
    G = (rows @ rows.T).toarray()
    return _from_pairs(tdm.poet_ids, lambda i, j: G[i, j])


def zero_matrix(poet_ids) -> SimilarityMatrix:
    return SimilarityMatrix(list(poet_ids), np.eye(len(poet_ids)))


# ---------------------------------------------------------------------------
# Fusion
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FusionParams:
    weights: tuple = (0.2, 0.2, 0.2, 0.2, 0.2)

    def __post_init__(self):
        w = tuple(float(x) for x in self.weights)
        object.__setattr__(self, "weights", w)
        if len(w) != len(DIMENSIONS) or any(x < 0 for x in w):
            raise SimilarityError("fusion needs five nonnegative weights")
        if abs(sum(w) - 1.0) > 1e-12:
            raise SimilarityError(f"fusion weights sum to {sum(w)!r}, not 1")

    def without(self, dropped) -> "FusionParams":
        """Zero the weights of ``dropped`` dimensions and rescale the rest to sum to 1."""
        w = [0.0 if d in dropped else x for d, x in zip(DIMENSIONS, self.weights)]
        s = sum(w)
        if s == 0:
            raise SimilarityError("no fusion weight left after dropping dimensions")
        w = [x / s for x in w]
        # absorb rounding into the largest weight so the sum check holds
        top = max(range(len(w)), key=lambda i: w[i])
        w[top] += 1.0 - sum(w)
        return FusionParams(tuple(w))


def minmax_offdiag(m: SimilarityMatrix) -> SimilarityMatrix:
    """Rescale off-diagonal entries to [0, 1]; diagonal stays 1.

    With two poets the single off-diagonal value maps to 1; any other constant
    off-diagonal maps to 0.
    """
    v = m.values
    n = v.shape[0]
    out = np.eye(n)
    if n < 2:
        return SimilarityMatrix(m.poet_ids, out)
    mask = ~np.eye(n, dtype=bool)
    if n == 2:
        out[mask] = 1.0
        return SimilarityMatrix(m.poet_ids, out)
    lo, hi = v[mask].min(), v[mask].max()
    if hi > lo:
        out[mask] = (v[mask] - lo) / (hi - lo)
    out = np.clip(out, 0.0, 1.0)
    return SimilarityMatrix(m.poet_ids, out)


def fuse(matrices: Sequence[SimilarityMatrix],
         params: FusionParams = FusionParams()) -> SimilarityMatrix:
    if len(matrices) != len(params.weights):
        raise SimilarityError("fuse expects one matrix per weight")
    ids = list(matrices[0].poet_ids)
    for m in matrices[1:]:
        if list(m.poet_ids) != ids:
            raise SimilarityError("poet ordering differs between similarity matrices")
    n = len(ids)
    acc = np.zeros((n, n))
    for w, m in zip(params.weights, matrices):
        acc = acc + w * minmax_offdiag(m).values
    np.fill_diagonal(acc, 1.0)
    acc = np.clip(acc, 0.0, 1.0)
    # symmetric by construction; enforce bit-exact mirror anyway
    upper = np.triu(acc, 1)
    acc = upper + upper.T + np.eye(n)
    return SimilarityMatrix(ids, acc)

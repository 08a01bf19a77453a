"""Numeric features per poet: embeddings, stylistic vectors, TF-IDF, meter profiles, PCA."""
from __future__ import annotations

import math
import warnings
from collections import Counter
from dataclasses import dataclass, fields
from typing import Optional, Union

import numpy as np
import scipy.sparse as sp

from .corpus import Corpus, PoetRecord, poet_tokens, tokenize
from .errors import FeatureError

VOWEL_LETTERS = frozenset("اویه")
MADDA_ALEF = "آ"


# ---------------------------------------------------------------------------
# Embedding tables
# ---------------------------------------------------------------------------

@dataclass
class EmbeddingTable:
    dim: int
    vectors: dict
    duplicates: int = 0

    def __contains__(self, key):
        return key in self.vectors

    def __getitem__(self, key):
        return self.vectors[key]

    def __len__(self):
        return len(self.vectors)


class WordEmbeddingTable(EmbeddingTable):
    """token -> vector."""


class PoemEmbeddingTable(EmbeddingTable):
    """poem_id -> vector."""


def _load_vectors(path, cls):
    table = {}
    dim = None
    duplicates = 0
    with open(path, encoding="utf-8") as fh:
        lines = [(i, ln.rstrip("\n")) for i, ln in enumerate(fh, start=1) if ln.strip()]
    if lines:
        head = lines[0][1].split()
        if len(head) == 2 and all(h.isdigit() for h in head):
            dim = int(head[1])
            lines = lines[1:]
    for lineno, line in lines:
        parts = line.split()
        key, values = parts[0], parts[1:]
        try:
            vec = np.array([float(v) for v in values], dtype=float)
        except ValueError as exc:
            raise FeatureError(f"{path}:{lineno}: non-numeric field ({exc})") from None
        if dim is None:
            dim = len(vec)
        if len(vec) != dim or dim == 0:
            raise FeatureError(
                f"{path}:{lineno}: vector for {key!r} has length {len(vec)}, expected {dim}")
        if not np.all(np.isfinite(vec)):
            raise FeatureError(f"{path}:{lineno}: non-finite value in vector for {key!r}")
        if key in table:
            duplicates += 1
        table[key] = vec
    if not table:
        raise FeatureError(f"{path}: no vectors")
    if duplicates:
        warnings.warn(f"{path}: {duplicates} duplicate keys, last occurrence kept")
    return cls(dim=dim, vectors=table, duplicates=duplicates)


def load_word_embeddings(path) -> WordEmbeddingTable:
    """Read a word2vec-style text file: optional ``count dim`` header, then ``token v1 .. vd``."""
    return _load_vectors(path, WordEmbeddingTable)


def load_poem_embeddings(path) -> PoemEmbeddingTable:
    return _load_vectors(path, PoemEmbeddingTable)


def save_vectors(table: EmbeddingTable, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{len(table.vectors)} {table.dim}\n")
        for key, vec in table.vectors.items():
            fh.write(key + " " + " ".join(f"{x:.8g}" for x in vec) + "\n")


def check_poem_join(corpus: Corpus, table: PoemEmbeddingTable) -> None:
    """Raise if the table holds poem ids that are not in the corpus."""
    known = {p.poem_id for poet in corpus.poets for p in poet.poems}
    missing = sorted(k for k in table.vectors if k not in known)
    if missing:
        raise FeatureError(f"poem embeddings reference unknown poem ids: {missing}")


def aggregate_poem_embeddings(poet: PoetRecord, table: PoemEmbeddingTable) -> np.ndarray:
    vecs = [table[p.poem_id] for p in poet.poems if p.poem_id in table]
    if not vecs:
        raise FeatureError(f"poet {poet.poet_id!r} has no embedded poems")
    return np.mean(np.vstack(vecs), axis=0)


# ---------------------------------------------------------------------------
# Stylistic features
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StylisticFeatureVector:
    avg_verse_len: float
    avg_word_len: float
    type_token_ratio: float
    pos_diversity: float
    noun_ratio: float
    verb_ratio: float
    adj_ratio: float
    adv_ratio: float
    word_len_variance: float
    word_len_std: float
    syllable_complexity: float
    has_pos: bool = False

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls) if f.name != "has_pos"]

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in self.field_names()], dtype=float)


def _pos_class(tag: str) -> Optional[str]:
    t = tag.upper()
    if t.startswith("ADV"):
        return "adv"
    if t.startswith("ADJ") or t.startswith("AJ"):
        return "adj"
    if t.startswith("N"):
        return "noun"
    if t.startswith("V"):
        return "verb"
    return None


def syllable_estimate(token: str) -> int:
    return sum(ch in VOWEL_LETTERS for ch in token) + (1 if token.startswith(MADDA_ALEF) else 0)


def extract_stylistic_features(poet: PoetRecord) -> StylisticFeatureVector:
    n_verses = 0
    tokens = []
    tags = []
    tagged = False
    for poem in poet.poems:
        for verse in poem.verses:
            n_verses += 1
            tokens.extend(tokenize(verse))
        if poem.pos_tags is not None:
            tagged = True
            for seq in poem.pos_tags:
                tags.extend(seq)
    if not tokens:
        raise FeatureError(f"poet {poet.poet_id!r} has no tokens")

    lengths = np.array([len(t) for t in tokens], dtype=float)
    var = float(np.mean((lengths - lengths.mean()) ** 2))

    if tags:
        classes = Counter(_pos_class(t) for t in tags)
        total = len(tags)
        pos = dict(
            pos_diversity=len(set(tags)) / total,
            noun_ratio=classes["noun"] / total,
            verb_ratio=classes["verb"] / total,
            adj_ratio=classes["adj"] / total,
            adv_ratio=classes["adv"] / total,
        )
    else:
        pos = dict.fromkeys(
            ["pos_diversity", "noun_ratio", "verb_ratio", "adj_ratio", "adv_ratio"], 0.0)

    return StylisticFeatureVector(
        avg_verse_len=len(tokens) / n_verses,
        avg_word_len=float(lengths.mean()),
        type_token_ratio=len(set(tokens)) / len(tokens),
        word_len_variance=var,
        word_len_std=math.sqrt(var),
        syllable_complexity=float(np.mean([syllable_estimate(t) for t in tokens])),
        has_pos=tagged and bool(tags),
        **pos,
    )


def zscore_columns(matrix) -> np.ndarray:
    """Standardize columns with the population std; constant columns become zeros."""
    X = np.asarray(matrix, dtype=float)
    if X.ndim != 2 or X.shape[0] < 2:
        raise FeatureError("insufficient rows for z-score standardization")
    mean = X.mean(axis=0)
    centered = X - mean
    std = np.sqrt(np.mean(centered ** 2, axis=0))
    out = np.zeros_like(X)
    ok = std > 1e-12 * np.maximum(1.0, np.abs(mean))
    out[:, ok] = centered[:, ok] / std[ok]
    return out


# ---------------------------------------------------------------------------
# PCA
# ---------------------------------------------------------------------------

@dataclass
class PcaModel:
    mean: np.ndarray
    components: np.ndarray  # (k, d), orthonormal rows
    explained_variance: np.ndarray
    explained_variance_ratio: np.ndarray

    @property
    def n_components(self) -> int:
        return self.components.shape[0]


def pca_fit(matrix, n_components: Optional[int] = None,
            variance: Optional[float] = None) -> PcaModel:
    """Fit PCA by eigendecomposition of the (population) covariance matrix.

    Give exactly one of ``n_components`` or ``variance``; with ``variance`` the
    smallest number of components whose cumulative explained-variance ratio
    reaches that fraction is kept. Each component is sign-fixed so that its
    largest-magnitude coordinate is positive.
    """
    X = np.asarray(matrix, dtype=float)
    if X.ndim != 2 or X.shape[0] < 2:
        raise FeatureError("PCA needs at least 2 rows")
    if (n_components is None) == (variance is None):
        raise FeatureError("give exactly one of n_components or variance")
    rows, cols = X.shape
    limit = min(rows - 1, cols)

    mean = X.mean(axis=0)
    C = X - mean
    cov = C.T @ C / rows
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(-evals, kind="stable")
    evals = np.clip(evals[order], 0.0, None)
    evecs = evecs[:, order].T
    total = evals.sum()
    ratio = evals / total if total > 0 else np.zeros_like(evals)

    if n_components is not None:
        k = int(n_components)
        if k < 1 or k > limit:
            raise FeatureError(f"n_components={k} must be in [1, {limit}]")
    else:
        if not 0 < variance <= 1:
            raise FeatureError("variance fraction must be in (0, 1]")
        if total <= 0:
            k = 1
        else:
            k = int(np.searchsorted(np.cumsum(ratio), variance - 1e-12) + 1)
        k = max(1, min(k, limit))

    comps = evecs[:k].copy()
    for row in comps:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0
    return PcaModel(mean=mean, components=comps, explained_variance=evals[:k],
                    explained_variance_ratio=ratio[:k])


def pca_transform(model: PcaModel, matrix) -> np.ndarray:
    X = np.asarray(matrix, dtype=float)
    return (X - model.mean) @ model.components.T


def pca_inverse_transform(model: PcaModel, scores) -> np.ndarray:
    return np.asarray(scores, dtype=float) @ model.components + model.mean


# ---------------------------------------------------------------------------
# TF-IDF and IDF
# ---------------------------------------------------------------------------

@dataclass
class TermDocMatrix:
    poet_ids: list
    vocabulary: list
    rows: sp.csr_matrix
    idf: np.ndarray


def _poet_counts(corpus: Corpus) -> list[Counter]:
    return [Counter(poet_tokens(p)) for p in corpus.poets]


def tfidf_fit(corpus: Corpus, max_features: int = 100_000) -> TermDocMatrix:
    """One document per poet; raw tf times smoothed idf, rows L2-normalized.

    idf(t) = ln((1 + P) / (1 + df(t))) + 1. The vocabulary keeps the
    ``max_features`` most frequent tokens corpus-wide (ties broken
    lexicographically) and is then sorted.
    """
    if len(corpus) == 0:
        raise FeatureError("cannot fit TF-IDF on an empty corpus")
    counts = _poet_counts(corpus)
    total = Counter()
    df = Counter()
    for c in counts:
        total.update(c)
        df.update(c.keys())
    ranked = sorted(total, key=lambda t: (-total[t], t))[:max_features]
    vocab = sorted(ranked)
    index = {t: i for i, t in enumerate(vocab)}
    P = len(corpus)
    idf = np.array([math.log((1 + P) / (1 + df[t])) + 1.0 for t in vocab])

    data, indices, indptr = [], [], [0]
    for c in counts:
        cols = sorted(index[t] for t in c if t in index)
        vals = np.array([c[vocab[j]] * idf[j] for j in cols], dtype=float)
        norm = math.sqrt(float(np.dot(vals, vals))) if len(vals) else 0.0
        if norm > 0:
            vals = vals / norm
        data.extend(vals.tolist())
        indices.extend(cols)
        indptr.append(len(indices))
    rows = sp.csr_matrix((data, indices, indptr), shape=(P, len(vocab)))
    return TermDocMatrix(corpus.poet_ids, vocab, rows, idf)


def poet_idf(corpus: Corpus) -> dict:
    """idf(t) = ln(1 + P / df(t)) with document frequency counted over poets."""
    df = Counter()
    for c in _poet_counts(corpus):
        df.update(c.keys())
    P = len(corpus)
    return {t: math.log(1 + P / n) for t, n in df.items()}


# ---------------------------------------------------------------------------
# Meter
# ---------------------------------------------------------------------------

MeterProfile = Counter


def meter_profile(poet: PoetRecord) -> Counter:
    return Counter(p.meter_label for p in poet.poems if p.meter_label)


# ---------------------------------------------------------------------------
# Bulk helpers used by the pipeline
# ---------------------------------------------------------------------------

def stylistic_matrix_input(corpus: Corpus, variance: float = 0.95):
    """Stylistic feature table -> z-scored -> PCA-reduced poet vectors."""
    feats = [extract_stylistic_features(p) for p in corpus.poets]
    X = np.vstack([f.as_array() for f in feats])
    Z = zscore_columns(X)
    model = pca_fit(Z, variance=variance)
    return feats, pca_transform(model, Z), model


def thematic_vectors(corpus: Corpus, table: Optional[PoemEmbeddingTable],
                     n_components: int = 64):
    """Average poem embeddings per poet, then PCA to at most ``n_components``.

    Returns (vectors, present mask). Poets with no embedded poems get a zero
    row and ``present=False``.
    """
    n = len(corpus)
    present = np.zeros(n, dtype=bool)
    if table is None or n == 0:
        return np.zeros((n, 1)), present
    rows = []
    for i, poet in enumerate(corpus.poets):
        try:
            rows.append(aggregate_poem_embeddings(poet, table))
            present[i] = True
        except FeatureError:
            rows.append(None)
    if present.sum() < 2:
        out = np.zeros((n, table.dim))
        for i, r in enumerate(rows):
            if r is not None:
                out[i] = r
        return out, present
    X = np.vstack([r for r in rows if r is not None])
    k = min(n_components, X.shape[0] - 1, X.shape[1])
    model = pca_fit(X, n_components=k)
    reduced = pca_transform(model, X)
    out = np.zeros((n, k))
    out[present] = reduced
    return out, present


def features_table(feats: list, poet_ids: list) -> list[list[Union[str, float]]]:
    names = StylisticFeatureVector.field_names()
    rows = [["poet_id"] + names + ["has_pos"]]
    for pid, f in zip(poet_ids, feats):
        rows.append([pid] + [getattr(f, n) for n in names] + [int(f.has_pos)])
    return rows

import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from poetgraph.corpus import PoemRecord, PoetRecord, make_corpus, normalize_corpus
from poetgraph.errors import SimilarityError
from poetgraph.features import WordEmbeddingTable, poet_idf, tfidf_fit
from poetgraph.similarity import (FusionParams, SemanticParams, SimilarityMatrix, contrast,
                                  cosine, fuse, lexical_matrix, meter_matrix, minmax_offdiag,
                                  poet_vocab, semantic_matrix, semantic_pair, stylistic_matrix,
                                  thematic_matrix)


def corpus_of(texts):
    poets = [PoetRecord(pid, pid, (PoemRecord(f"{pid}-0", (t,)),)) for pid, t in texts.items()]
    return normalize_corpus(make_corpus(poets))


def emb(**vecs):
    return WordEmbeddingTable(len(next(iter(vecs.values()))),
                              {k: np.asarray(v, float) for k, v in vecs.items()})


class TestCosine:
    def test_values(self):
        assert cosine((1, 0), (1, 0)) == 1.0
        assert cosine((1, 0), (0, 1)) == 0.0
        assert abs(cosine((1, 1), (1, 0)) - 0.70710678) < 1e-8

    def test_zero_vector(self):
        assert cosine((0, 0), (1, 0)) == 0.0

    def test_mismatch(self):
        with pytest.raises(SimilarityError):
            cosine((1, 0), (1, 0, 0))


def semantic_oracle(tokens_a, tokens_b, vec, idf, g=0.5, d=0.5, k=3.0):
    """Scalar re-derivation of the semantic score using only math."""
    def freqs(tokens):
        c = Counter(tokens)
        return {t: n / len(tokens) for t, n in c.items()}

    def cos(u, v):
        dot = sum(a * b for a, b in zip(u, v))
        return dot / (math.sqrt(sum(a * a for a in u)) * math.sqrt(sum(b * b for b in v)))

    def directed(fa, fb):
        num = den = 0.0
        for w in sorted(fa):
            best = max(max(cos(vec[w], vec[u]), 0.0) for u in fb)
            num += idf[w] * best
            den += idf[w]
        return num / den

    fa, fb = freqs(tokens_a), freqs(tokens_b)
    base = (directed(fa, fb) + directed(fb, fa)) / 2
    shared = set(fa) & set(fb)
    fs = sum((min(fa[w], fb[w]) / max(fa[w], fb[w])) ** 2 for w in shared) / len(shared) \
        if shared else 0.0
    jac = len(shared) / len(set(fa) | set(fb))
    raw = base * (g + (1 - g) * fs) * (d + (1 - d) * jac)
    return (math.exp(k * raw) - 1) / (math.exp(k) - 1)


class TestSemantic:
    E = emb(x=(1, 0), y=(0, 1), z=(1, 1), w=(-1, 0.2))

    def _vocabs(self, texts, top_n=2000):
        c = corpus_of(texts)
        idf = poet_idf(c)
        vs = [poet_vocab(p.poet_id, p.poems[0].verses[0].split(), self.E, top_n) for p in c.poets]
        return c, idf, vs

    def test_identical_poets(self):
        _, idf, (a, b) = self._vocabs({"a": "x y y", "b": "y x y"})
        assert semantic_pair(a, b, idf) == 1.0

    def test_disjoint_orthogonal(self):
        _, idf, (a, b) = self._vocabs({"a": "x x", "b": "y"})
        assert semantic_pair(a, b, idf) == 0.0

    def test_toy_matches_oracle(self):
        texts = {"a": "x x y", "b": "x z"}
        c, idf, (a, b) = self._vocabs(texts)
        vec = {k: tuple(v) for k, v in self.E.vectors.items()}
        expected = semantic_oracle(texts["a"].split(), texts["b"].split(), vec, idf)
        assert semantic_pair(a, b, idf) == pytest.approx(expected, abs=1e-12)
        assert 0 < expected < 1

    def test_negative_cosines_clamped(self):
        texts = {"a": "x", "b": "w y"}
        _, idf, (a, b) = self._vocabs(texts)
        vec = {k: tuple(v) for k, v in self.E.vectors.items()}
        expected = semantic_oracle(texts["a"].split(), texts["b"].split(), vec, idf)
        assert semantic_pair(a, b, idf) == pytest.approx(expected, abs=1e-12)

    def test_symmetry_exact(self):
        _, idf, (a, b) = self._vocabs({"a": "x x y w", "b": "x z z y"})
        assert semantic_pair(a, b, idf) == semantic_pair(b, a, idf)

    def test_no_embedded_vocab(self):
        _, idf, (a, b) = self._vocabs({"a": "q r", "b": "x"})
        with pytest.raises(SimilarityError, match="'a'"):
            semantic_pair(a, b, idf)

    def test_matrix(self):
        texts = {"a": "x x y", "b": "x z", "c": "z w y"}
        c = corpus_of(texts)
        idf = poet_idf(c)
        M = semantic_matrix(c, self.E, idf)
        M.check()
        vec = {k: tuple(v) for k, v in self.E.vectors.items()}
        ids = list(texts)
        for i in range(3):
            for j in range(i + 1, 3):
                exp = semantic_oracle(texts[ids[i]].split(), texts[ids[j]].split(), vec, idf)
                assert M.values[i, j] == pytest.approx(exp, abs=1e-12)

    def test_single_poet(self):
        c = corpus_of({"a": "x"})
        M = semantic_matrix(c, self.E, poet_idf(c))
        np.testing.assert_array_equal(M.values, [[1.0]])

    def test_unembedded_poet_zero(self):
        c = corpus_of({"a": "x", "b": "q"})
        with pytest.warns(UserWarning):
            M = semantic_matrix(c, self.E, poet_idf(c))
        assert M.values[0, 1] == 0.0

    def test_top_n_truncation(self):
        v = poet_vocab("a", "x x x y y z".split(), self.E, top_n=2)
        assert set(v.freqs) == {"x", "y"}

    @given(st.floats(0, 1), st.floats(0, 1), st.floats(0.1, 20))
    def test_contrast_monotone(self, r1, r2, k):
        lo, hi = sorted((r1, r2))
        if lo < hi:
            assert contrast(lo, k) <= contrast(hi, k)
        assert contrast(0.0, k) == 0.0 and contrast(1.0, k) == 1.0

    def test_contrast_strict(self):
        assert contrast(0.3, 3.0) < contrast(0.31, 3.0)

    def test_params_validation(self):
        with pytest.raises(SimilarityError):
            SemanticParams(freq_blend=1.5)


class TestStylistic:
    def test_identical(self):
        M = stylistic_matrix(["a", "b"], [[0.3, -1.2], [0.3, -1.2]])
        assert M.values[0, 1] == 1.0

    def test_opposite(self):
        M = stylistic_matrix(["a", "b"], [[1, 0], [-1, 0]])
        assert abs(M.values[0, 1] - 1 / 6) < 1e-9

    def test_bounded(self, rng):
        M = stylistic_matrix(list("abcdef"), rng.normal(size=(6, 3)) * 5)
        off = M.values[~np.eye(6, dtype=bool)]
        assert np.all(off > 0) and np.all(off <= 1)
        M.check()

    def test_empty_components(self):
        with pytest.raises(SimilarityError):
            stylistic_matrix(["a"], np.zeros((1, 0)))


def thematic_oracle(x, y, lo):
    cos = sum(a * b for a, b in zip(x, y)) / (
        math.sqrt(sum(a * a for a in x)) * math.sqrt(sum(b * b for b in y)))
    de = math.sqrt(sum((a - b) ** 2 for a, b in zip(x, y)))
    dm = sum(abs(a - b) for a, b in zip(x, y))
    xs = [a - m for a, m in zip(x, lo)]
    ys = [b - m for b, m in zip(y, lo)]
    bc = 1 - sum(abs(a - b) for a, b in zip(xs, ys)) / sum(a + b for a, b in zip(xs, ys))
    return 0.5 * max(cos, 0) ** 2 + 0.2 * (1 / (1 + de)) ** 2 + 0.2 * (1 / (1 + dm)) ** 2 \
        + 0.1 * bc ** 2


class TestThematic:
    X = [[0.5, -1.0, 2.0, 0.1], [0.4, -0.7, 1.5, 0.3], [-1.2, 0.8, -0.4, 0.9]]

    def test_identical(self):
        M = thematic_matrix(["a", "b"], [[1.0, -2.0, 0.5], [1.0, -2.0, 0.5]])
        assert M.values[0, 1] == 1.0

    def test_three_poet_oracle(self):
        M = thematic_matrix(list("abc"), self.X)
        lo = [min(col) for col in zip(*self.X)]
        for i in range(3):
            for j in range(i + 1, 3):
                assert M.values[i, j] == pytest.approx(thematic_oracle(self.X[i], self.X[j], lo),
                                                       abs=1e-12)
        M.check()

    def test_absent_poet(self):
        M = thematic_matrix(list("abc"), self.X, present=[True, True, False])
        assert M.values[0, 2] == 0.0 and M.values[1, 2] == 0.0

    def test_range(self, rng):
        M = thematic_matrix(list("abcdefg"), rng.normal(size=(7, 5)))
        M.check()


class TestMeter:
    def test_parallel(self):
        M = meter_matrix(["a", "b"], [Counter(hazaj=2), Counter(hazaj=5)])
        assert M.values[0, 1] == pytest.approx(1.0)

    def test_disjoint(self):
        M = meter_matrix(["a", "b"], [Counter(hazaj=1), Counter(ramal=1)])
        assert M.values[0, 1] == 0.0

    def test_partial(self):
        M = meter_matrix(["a", "b"], [Counter(hazaj=1, ramal=1), Counter(hazaj=1)])
        assert abs(M.values[0, 1] - 2 ** -0.5) < 1e-9

    def test_empty_profile(self):
        M = meter_matrix(["a", "b"], [Counter(), Counter(hazaj=1)])
        np.testing.assert_array_equal(M.values, np.eye(2))


class TestLexical:
    def test_identical_and_disjoint(self):
        c = corpus_of({"a": "x y", "b": "y x", "c": "p q"})
        M = lexical_matrix(tfidf_fit(c))
        assert M.values[0, 1] == pytest.approx(1.0)
        assert M.values[0, 2] == 0.0
        M.check()

    def test_dot_product_oracle(self):
        c = corpus_of({"a": "x x y", "b": "y z", "c": "x z z w"})
        t = tfidf_fit(c)
        rows = t.rows.toarray()
        M = lexical_matrix(t)
        for i in range(3):
            for j in range(i + 1, 3):
                assert M.values[i, j] == pytest.approx(sum(rows[i] * rows[j]), abs=1e-14)
        # a=(0, 2, 1, 0)/sqrt5, b=(0, 0, 1, 1)/sqrt2 -> 1/sqrt10
        assert M.values[0, 1] == pytest.approx(1 / math.sqrt(10), abs=1e-12)

    def test_duplication_invariance(self):
        texts = {"a": "x y z z", "b": "y w", "c": "x w w"}
        m1 = lexical_matrix(tfidf_fit(corpus_of(texts))).values
        texts["b"] = texts["b"] + " " + texts["b"]
        m2 = lexical_matrix(tfidf_fit(corpus_of(texts))).values
        np.testing.assert_array_equal(m1, m2)


def sm(values, ids=("a", "b", "c")):
    return SimilarityMatrix(list(ids), np.array(values, float))


class TestFuse:
    M1 = [[1, 0.2, 0.4], [0.2, 1, 0.6], [0.4, 0.6, 1]]
    M2 = [[1, 0.9, 0.1], [0.9, 1, 0.5], [0.1, 0.5, 1]]

    def test_identical_inputs(self):
        fused = fuse([sm(self.M1)] * 5)
        np.testing.assert_allclose(fused.values, minmax_offdiag(sm(self.M1)).values, atol=1e-15)

    def test_one_hot(self):
        mats = [sm(self.M1), sm(self.M2), sm(self.M1), sm(self.M2), sm(self.M1)]
        for k in range(5):
            w = [0.0] * 5
            w[k] = 1.0
            fused = fuse(mats, FusionParams(tuple(w)))
            np.testing.assert_array_equal(fused.values, minmax_offdiag(mats[k]).values)

    def test_three_poet_oracle(self):
        # hand min-max: M1 off-diag (0.2, 0.4, 0.6) -> (0, .5, 1)
        #               M2 off-diag (0.9, 0.1, 0.5) -> (1, 0, .5)
        mats = [sm(self.M1), sm(self.M2), sm(self.M1), sm(self.M2), sm(self.M1)]
        fused = fuse(mats, FusionParams((0.4, 0.3, 0.1, 0.1, 0.1)))
        ab = 0.6 * 0 + 0.4 * 1
        ac = 0.6 * 0.5 + 0.4 * 0
        bc = 0.6 * 1 + 0.4 * 0.5
        np.testing.assert_allclose(fused.values, [[1, ab, ac], [ab, 1, bc], [ac, bc, 1]],
                                   atol=1e-12)
        fused.check()

    def test_two_poet_convention(self):
        mats = [sm([[1, v], [v, 1]], ids=("a", "b")) for v in (0.2, 0.4, 0.6, 0.8, 1.0)]
        np.testing.assert_array_equal(fuse(mats).values, np.ones((2, 2)))

    def test_constant_maps_to_zero(self):
        fused = fuse([sm([[1, .5, .5], [.5, 1, .5], [.5, .5, 1]])] * 5)
        np.testing.assert_array_equal(fused.values, np.eye(3))

    def test_order_mismatch(self):
        with pytest.raises(SimilarityError):
            fuse([sm(self.M1)] * 4 + [sm(self.M1, ids=("b", "a", "c"))])

    def test_weights_validation(self):
        with pytest.raises(SimilarityError):
            FusionParams((0.5, 0.5, 0.5, 0, 0))

    def test_without_renormalizes(self):
        p = FusionParams().without(["semantic"])
        assert p.weights[0] == 0.0
        assert sum(p.weights) == pytest.approx(1.0, abs=1e-12)
        assert p.weights[1] == pytest.approx(0.25)

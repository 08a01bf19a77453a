"""Deterministic synthetic corpus + embeddings for tests, demos and smoke runs.

Poets are drawn from a few latent "schools"; each school has its own favoured
vocabulary, meters and embedding centroid, so the resulting influence graph
has recoverable community structure. Raw verses deliberately contain Arabic
letter variants, harakat and zero-width non-joiners.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

LETTERS = list("ابپتجچحخدرزسشصطعغفقکگلمنوهی")
METERS = ["hazaj", "ramal", "rajaz", "motaqareb", "mozare", "khafif", "mojtas", "monsareh"]
TAGS = ["N", "V", "ADJ", "ADV", "P", "PRO", "CONJ"]

ARABIC_VARIANTS = {"ی": "ي", "ک": "ك"}
KASRA = "ِ"
ZWNJ = "‌"


def _make_vocab(rng, size):
    words = set()
    while len(words) < size:
        n = int(rng.integers(2, 7))
        words.add("".join(rng.choice(LETTERS, size=n)))
    return sorted(words)


def _corrupt(rng, word):
    chars = []
    for ch in word:
        if ch in ARABIC_VARIANTS and rng.random() < 0.3:
            ch = ARABIC_VARIANTS[ch]
        chars.append(ch)
        if rng.random() < 0.05:
            chars.append(KASRA)
    return "".join(chars)


def generate(out_dir, n_poets=32, n_schools=4, seed=7, word_dim=16, poem_dim=24,
             vocab_size=400, min_lines=40):
    """Write corpus.jsonl, word_vectors.txt, poem_vectors.txt and config.ini.

    Two poets are generated below ``min_lines`` so filtering is exercised;
    the default ``n_poets=32`` therefore leaves 30 poets after filtering.
    """
    rng = np.random.default_rng(seed)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    vocab = _make_vocab(rng, vocab_size)
    school_of_word = rng.integers(0, n_schools, size=len(vocab))
    word_centres = rng.normal(size=(n_schools, word_dim))
    poem_centres = rng.normal(size=(n_schools, poem_dim)) * 2.0

    school_words = [np.flatnonzero(school_of_word == s) for s in range(n_schools)]
    school_meters = [rng.choice(len(METERS), size=3, replace=False) for _ in range(n_schools)]

    poets = []
    poem_vecs = {}
    short = {n_poets - 1, n_poets - 2}
    for p in range(n_poets):
        school = p % n_schools
        pid = f"poet{p:02d}"
        n_lines = int(rng.integers(min_lines // 4, min_lines - 1)) if p in short \
            else int(rng.integers(min_lines, 3 * min_lines))
        tagged = p % 3 == 0
        metered = p % 7 != 5
        # favoured words get heavy weight, the rest a thin tail
        weights = np.full(len(vocab), 0.2)
        weights[school_words[school]] = 5.0
        weights *= rng.gamma(2.0, 1.0, size=len(vocab))
        weights /= weights.sum()
        mean_len = 3 + school + rng.random()

        poems = []
        lines_left = n_lines
        k = 0
        while lines_left > 0:
            size = min(lines_left, int(rng.integers(4, 13)))
            lines_left -= size
            verses, tags = [], []
            for _ in range(size):
                n_tok = max(1, int(rng.poisson(mean_len)))
                idx = rng.choice(len(vocab), size=n_tok, p=weights)
                words = [_corrupt(rng, vocab[i]) for i in idx]
                if n_tok > 1 and rng.random() < 0.1:
                    words[0] = words[0] + ZWNJ + words[1]
                    del words[1]
                verse = " ".join(words)
                if rng.random() < 0.1:
                    verse += " ،،"
                verses.append(verse)
                tags.append([str(t) for t in rng.choice(TAGS, size=len(words))])
            poem_id = f"{pid}-{k:03d}"
            poem = {"poem_id": poem_id, "title": f"{pid} #{k}", "verses": verses}
            if metered:
                m = school_meters[school]
                poem["meter_label"] = METERS[int(m[int(rng.integers(0, len(m)))])]
            if tagged:
                poem["pos_tags"] = tags
            poems.append(poem)
            poem_vecs[poem_id] = poem_centres[school] + rng.normal(scale=1.0, size=poem_dim)
            k += 1
        poets.append({"poet_id": pid, "name": f"Poet {p}",
                      "birth_year_hijri": int(300 + 20 * p), "poems": poems})

    order = rng.permutation(n_poets)  # file order differs from id order on purpose
    with open(out / "corpus.jsonl", "w", encoding="utf-8", newline="\n") as fh:
        for i in order:
            fh.write(json.dumps(poets[i], ensure_ascii=False) + "\n")

    with open(out / "word_vectors.txt", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{len(vocab)} {word_dim}\n")
        for w, s in zip(vocab, school_of_word):
            v = word_centres[s] + rng.normal(scale=0.6, size=word_dim)
            fh.write(w + " " + " ".join(f"{x:.6f}" for x in v) + "\n")

    with open(out / "poem_vectors.txt", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{len(poem_vecs)} {poem_dim}\n")
        for key in sorted(poem_vecs):
            fh.write(key + " " + " ".join(f"{x:.6f}" for x in poem_vecs[key]) + "\n")

    (out / "config.ini").write_text(
        "[input]\n"
        "corpus = corpus.jsonl\n"
        "word_embeddings = word_vectors.txt\n"
        "poem_embeddings = poem_vectors.txt\n"
        f"min_lines = {min_lines}\n\n"
        "[graph]\n"
        "target_density = 0.3\n\n"
        "[community]\n"
        f"seed = {seed}\n",
        encoding="utf-8")
    return out

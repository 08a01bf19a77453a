import itertools
import json

import numpy as np
import pytest

from poetgraph.graph import InfluenceGraph


def make_graph(n, pairs, weights=None):
    ids = [f"v{i}" for i in range(n)]
    if weights is None:
        weights = [1.0] * len(pairs)
    return InfluenceGraph(ids, [(i, j, w) for (i, j), w in zip(pairs, weights)])


def path_graph(n):
    return make_graph(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n):
    return make_graph(n, [(i, (i + 1) % n) for i in range(n)])


def complete_graph(n):
    return make_graph(n, list(itertools.combinations(range(n), 2)))


def star_graph(leaves):
    return make_graph(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def two_triangles_bridge():
    return make_graph(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)])


def two_k5_bridge():
    pairs = list(itertools.combinations(range(5), 2))
    pairs += [(i + 5, j + 5) for i, j in itertools.combinations(range(5), 2)]
    pairs.append((4, 5))
    return make_graph(10, pairs)


def random_graph(rng, n, p=0.4, weighted=False, connected=False):
    pairs = set()
    if connected:
        perm = rng.permutation(n)
        for k in range(1, n):
            a, b = int(perm[k]), int(perm[rng.integers(0, k)])
            pairs.add((min(a, b), max(a, b)))
    for i, j in itertools.combinations(range(n), 2):
        if rng.random() < p:
            pairs.add((i, j))
    pairs = sorted(pairs)
    weights = rng.uniform(0.05, 1.0, size=len(pairs)).tolist() if weighted else None
    return make_graph(n, pairs, weights)


def write_corpus(path, poets):
    with open(path, "w", encoding="utf-8") as fh:
        for p in poets:
            fh.write(json.dumps(p, ensure_ascii=False) + "\n")
    return path


def poet_obj(pid, verses, meter=None, tags=None, poem_id=None):
    poem = {"poem_id": poem_id or f"{pid}-0", "verses": verses}
    if meter:
        poem["meter_label"] = meter
    if tags is not None:
        poem["pos_tags"] = tags
    return {"poet_id": pid, "name": pid.title(), "birth_year_hijri": None, "poems": [poem]}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def fixture_dir(tmp_path_factory):
    from poetgraph.synthetic import generate
    return generate(tmp_path_factory.mktemp("fixture"), n_poets=32, seed=7)

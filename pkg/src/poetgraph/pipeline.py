"""Stage orchestration: config, persisted intermediates, report and MANIFEST."""
from __future__ import annotations

import configparser
import hashlib
import json
import logging
import warnings
from collections import Counter
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import io
from .community import louvain
from .corpus import (Corpus, filter_poets, load_corpus, normalize_corpus,
                     save_corpus)
from .errors import GraphError, PipelineError
from .features import (check_poem_join, features_table, load_poem_embeddings,
                       load_word_embeddings, meter_profile, poet_idf, stylistic_matrix_input,
                       tfidf_fit, thematic_vectors)
from .graph import (InfluenceGraph, build_graph, calibrate_threshold, connected_components,
                    degree_histogram, degree_stats, density, edge_weight_histogram)
from .metrics import (METRICS, average_clustering, average_shortest_path, centrality_table,
                      pearson_correlation_matrix)
from .similarity import (DIMENSIONS, FusionParams, SemanticParams, fuse, lexical_matrix,
                         meter_matrix, semantic_matrix, stylistic_matrix, thematic_matrix,
                         zero_matrix)

log = logging.getLogger(__name__)

STAGES = ("ingest", "features", "similarity", "graph", "analyze", "communities", "report")

CORPUS_FILE = "corpus.normalized.jsonl"


@dataclass
class PipelineConfig:
    corpus_path: Optional[str] = None
    word_embeddings_path: Optional[str] = None
    poem_embeddings_path: Optional[str] = None
    min_lines: int = 500
    semantic: SemanticParams = field(default_factory=SemanticParams)
    fusion: FusionParams = field(default_factory=FusionParams)
    threshold: float = 0.0
    target_density: Optional[float] = None
    top_k: Optional[int] = None
    katz_alpha: Optional[float] = None
    katz_beta: float = 1.0
    weighted_paths: bool = False
    seed: int = 0
    output_dir: str = "poetgraph_out"
    bin_count: int = 40
    stylistic_variance: float = 0.95
    thematic_components: int = 64
    max_features: int = 100_000
    figures: bool = True

    @classmethod
    def from_file(cls, path) -> "PipelineConfig":
        """Read an INI-style file (``[section]`` headers, ``key = value``, comma lists).

        Relative paths are resolved against the config file's directory.
        """
        path = Path(path)
        cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
        base = path.parent

        def get(section, key, conv=str, default=None):
            if cp.has_option(section, key):
                raw = cp.get(section, key).strip()
                if raw == "" or raw.lower() in ("none", "null"):
                    return None
                return conv(raw)
            return default

        def resolve(p):
            if p is None:
                return None
            q = Path(p)
            return str(q if q.is_absolute() else base / q)

        def to_bool(s):
            return s.lower() in ("1", "true", "yes", "on")

        cfg = cls()
        cfg.corpus_path = resolve(get("input", "corpus"))
        cfg.word_embeddings_path = resolve(get("input", "word_embeddings"))
        cfg.poem_embeddings_path = resolve(get("input", "poem_embeddings"))
        cfg.min_lines = get("input", "min_lines", int, cfg.min_lines)
        cfg.semantic = SemanticParams(
            freq_blend=get("semantic", "freq_blend", float, 0.5),
            jaccard_blend=get("semantic", "jaccard_blend", float, 0.5),
            scale_k=get("semantic", "scale_k", float, 3.0),
            top_n_vocab=get("semantic", "top_n_vocab", int, 2000),
        )
        weights = get("fusion", "weights")
        if weights is not None:
            cfg.fusion = FusionParams(tuple(float(x) for x in weights.split(",")))
        cfg.threshold = get("graph", "threshold", float, cfg.threshold)
        cfg.target_density = get("graph", "target_density", float)
        cfg.top_k = get("graph", "top_k", int)
        cfg.bin_count = get("graph", "bin_count", int, cfg.bin_count)
        cfg.katz_alpha = get("metrics", "katz_alpha", float)
        cfg.katz_beta = get("metrics", "katz_beta", float, cfg.katz_beta)
        cfg.weighted_paths = get("metrics", "weighted_paths", to_bool, False)
        cfg.seed = get("community", "seed", int, cfg.seed)
        out = get("output", "dir")
        if out is not None:
            cfg.output_dir = resolve(out)
        cfg.figures = get("output", "figures", to_bool, True)
        return cfg


# ---------------------------------------------------------------------------
# MANIFEST
# ---------------------------------------------------------------------------

def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


class Manifest:
    """Completion record kept in ``<output>/MANIFEST`` (canonical JSON)."""

    def __init__(self, out_dir: Path):
        self.path = out_dir / "MANIFEST"
        self.out_dir = out_dir
        if self.path.exists():
            data = json.loads(self.path.read_text(encoding="utf-8"))
        else:
            data = {}
        self.stages = data.get("stages", {})
        self.warnings = data.get("warnings", {})
        self.files = data.get("files", {})

    def record(self, stage, files, stage_warnings, status="ok", error=None):
        entry = {"status": status}
        if error is not None:
            entry["error"] = error
        self.stages[stage] = entry
        self.warnings[stage] = list(stage_warnings)
        for name in files:
            p = self.out_dir / name
            if p.exists():
                self.files[name] = _sha256(p)
        self.write()

    @property
    def complete(self) -> bool:
        return all(self.stages.get(s, {}).get("status") == "ok" for s in STAGES)

    def write(self):
        data = {
            "complete": self.complete,
            "stages": {s: self.stages[s] for s in STAGES if s in self.stages},
            "warnings": {s: self.warnings[s] for s in STAGES if self.warnings.get(s)},
            "files": dict(sorted(self.files.items())),
        }
        self.path.write_text(io.dumps_canonical(data) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# Stages
# ---------------------------------------------------------------------------

def _load_stage_corpus(out: Path) -> Corpus:
    c = load_corpus(out / CORPUS_FILE)
    return replace(c, normalization_applied=True)


def _read_node_ids(out: Path) -> list:
    return [r[0] for r in io.read_rows(out / "nodes.csv")[1:]]


def stage_ingest(cfg: PipelineConfig, out: Path, warn):
    if not cfg.corpus_path:
        raise ValueError("no corpus path configured")
    raw = load_corpus(cfg.corpus_path)
    corpus = filter_poets(normalize_corpus(raw), cfg.min_lines)
    dropped = len(raw) - len(corpus)
    if dropped:
        warn(f"{dropped} poets below min_lines={cfg.min_lines} removed")
    save_corpus(corpus, out / CORPUS_FILE)
    rows = [["poet_id", "name", "birth_year_hijri", "poem_count", "verse_count"]]
    for p in corpus.poets:
        year = "" if p.birth_year_hijri is None else p.birth_year_hijri
        rows.append([p.poet_id, p.name, year, len(p.poems), p.verse_count])
    io.write_rows(out / "nodes.csv", rows)
    return [CORPUS_FILE, "nodes.csv"]


def stage_features(cfg: PipelineConfig, out: Path, warn):
    corpus = _load_stage_corpus(out)
    ids = corpus.poet_ids
    feats, reduced, model = stylistic_matrix_input(corpus, cfg.stylistic_variance)
    io.write_rows(out / "features.csv", features_table(feats, ids))
    io.write_rows(out / "stylistic_pca.csv",
                  [["poet_id"] + [f"pc{i + 1}" for i in range(reduced.shape[1])]]
                  + [[pid] + list(map(float, row)) for pid, row in zip(ids, reduced)])
    files = ["features.csv", "stylistic_pca.csv", "meter_profiles.csv"]

    prof_rows = [["poet_id", "meter_label", "count"]]
    for p in corpus.poets:
        prof = meter_profile(p)
        if not prof:
            warn(f"poet {p.poet_id} has no meter labels; meter similarity 0")
        for lab in sorted(prof):
            prof_rows.append([p.poet_id, lab, prof[lab]])
    io.write_rows(out / "meter_profiles.csv", prof_rows)

    if cfg.poem_embeddings_path:
        table = load_poem_embeddings(cfg.poem_embeddings_path)
        known = {pm.poem_id for poet in corpus.poets for pm in poet.poems}
        stray = [k for k in table.vectors if k not in known]
        if stray:
            # filtered poets leave orphaned embeddings behind; drop them
            warn(f"{len(stray)} poem embeddings do not match retained poems; ignored")
            for k in stray:
                del table.vectors[k]
        check_poem_join(corpus, table)
        vecs, present = thematic_vectors(corpus, table, cfg.thematic_components)
        for pid, ok in zip(ids, present):
            if not ok:
                warn(f"poet {pid} has no poem embeddings; thematic similarity 0")
        io.write_rows(out / "thematic_vectors.csv",
                      [["poet_id", "present"] + [f"pc{i + 1}" for i in range(vecs.shape[1])]]
                      + [[pid, int(ok)] + list(map(float, row))
                         for pid, ok, row in zip(ids, present, vecs)])
        files.append("thematic_vectors.csv")
    return files


def _read_vectors(path, skip=1):
    rows = io.read_rows(path)[1:]
    return [r[0] for r in rows], np.array([[float(x) for x in r[skip:]] for r in rows])


def stage_similarity(cfg: PipelineConfig, out: Path, warn):
    corpus = _load_stage_corpus(out)
    ids = corpus.poet_ids
    mats = {}
    dropped = []

    if cfg.word_embeddings_path:
        emb = load_word_embeddings(cfg.word_embeddings_path)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            mats["semantic"] = semantic_matrix(corpus, emb, poet_idf(corpus), cfg.semantic)
        for w in caught:
            warn(str(w.message))
    else:
        warn("no word embeddings configured; semantic dimension skipped, weights renormalized")
        mats["semantic"] = zero_matrix(ids)
        dropped.append("semantic")

    sid, X = _read_vectors(out / "stylistic_pca.csv")
    mats["stylistic"] = stylistic_matrix(sid, X)

    tpath = out / "thematic_vectors.csv"
    if tpath.exists():
        rows = io.read_rows(tpath)[1:]
        present = np.array([r[1] == "1" for r in rows])
        T = np.array([[float(x) for x in r[2:]] for r in rows])
        mats["thematic"] = thematic_matrix([r[0] for r in rows], T, present)
    else:
        warn("no poem embeddings configured; thematic dimension skipped, weights renormalized")
        mats["thematic"] = zero_matrix(ids)
        dropped.append("thematic")

    profiles = {pid: Counter() for pid in ids}
    for pid, lab, cnt in io.read_rows(out / "meter_profiles.csv")[1:]:
        profiles[pid][lab] = int(cnt)
    mats["meter"] = meter_matrix(ids, [profiles[p] for p in ids])
    mats["lexical"] = lexical_matrix(tfidf_fit(corpus, cfg.max_features))

    files = []
    for dim in DIMENSIONS:
        mats[dim].check()
        io.write_similarity_csv(mats[dim], out / f"similarity_{dim}.csv")
        files.append(f"similarity_{dim}.csv")
    params = cfg.fusion.without(dropped) if dropped else cfg.fusion
    fused = fuse([mats[d] for d in DIMENSIONS], params)
    fused.check()
    io.write_similarity_csv(fused, out / "fused.csv")
    io.write_json({"fusion_weights": dict(zip(DIMENSIONS, params.weights)),
                   "dropped_dimensions": dropped}, out / "fusion.json")
    return files + ["fused.csv", "fusion.json"]


def stage_graph(cfg: PipelineConfig, out: Path, warn):
    fused = io.read_similarity_csv(out / "fused.csv")
    tau = cfg.threshold
    if cfg.target_density is not None:
        tau = calibrate_threshold(fused, cfg.target_density)
    g = build_graph(fused, tau, cfg.top_k)
    names = {r[0]: r[1] for r in io.read_rows(out / "nodes.csv")[1:]}
    io.write_edges_tsv(g, out / "edges.tsv")
    io.write_graphml(g, out / "graph.graphml", names)
    io.write_json({"threshold": tau, "target_density": cfg.target_density, "top_k": cfg.top_k},
                  out / "graph_params.json")
    return ["edges.tsv", "graph.graphml", "graph_params.json"]


def _load_graph(out: Path) -> InfluenceGraph:
    return io.read_edges_tsv(out / "edges.tsv", _read_node_ids(out))


def stage_analyze(cfg: PipelineConfig, out: Path, warn):
    g = _load_graph(out)
    table = centrality_table(g, weighted_paths=cfg.weighted_paths,
                             katz_alpha=cfg.katz_alpha, katz_beta=cfg.katz_beta)
    if g.edge_count == 0:
        warn("graph has no edges; eigenvector centrality set to 0")
    io.write_centrality_csv(table, out / "centrality.csv")
    files = ["centrality.csv"]
    if g.n >= 2:
        R, const = pearson_correlation_matrix(table)
        for name in const:
            warn(f"centrality column {name} has zero variance; its correlations set to 0")
        io.write_correlation_csv(R, out / "correlation.csv")
        files.append("correlation.csv")
    io.write_rows(out / "degree_hist.csv", [["degree", "count"]] + degree_histogram(g))
    io.write_rows(out / "weight_hist.csv", [["bin_lower", "bin_upper", "count"]]
                  + edge_weight_histogram(g, cfg.bin_count))
    top = [["metric", "rank", "poet_id", "value"]]
    for m in METRICS:
        for rank, (pid, v) in enumerate(table.top(m, 5), start=1):
            top.append([m, rank, pid, v])
    io.write_rows(out / "top5.csv", top)
    return files + ["degree_hist.csv", "weight_hist.csv", "top5.csv"]


def stage_communities(cfg: PipelineConfig, out: Path, warn):
    g = _load_graph(out)
    fused = io.read_similarity_csv(out / "fused.csv")
    if g.m > 0:
        part = louvain(g, seed=cfg.seed)
        labels, q = part.labels(g.node_ids), part.modularity
    else:
        warn("graph has no edges; every poet is its own community")
        labels, q = list(range(g.n)), None
    io.write_rows(out / "communities.csv",
                  [["poet_id", "community_id"]] + [[v, c] for v, c in zip(g.node_ids, labels)])
    io.write_json(community_summary(g.node_ids, labels, fused, q), out / "communities.json")
    return ["communities.csv", "communities.json"]


def community_summary(node_ids, labels, fused, q):
    index = {v: i for i, v in enumerate(fused.poet_ids)}
    groups = {}
    for v, c in zip(node_ids, labels):
        groups.setdefault(c, []).append(v)
    comms = []
    for c in sorted(groups):
        members = sorted(groups[c])
        idx = [index[v] for v in members]
        if len(idx) > 1:
            sub = fused.values[np.ix_(idx, idx)]
            iu = np.triu_indices(len(idx), 1)
            mean_sim = float(sub[iu].mean())
        else:
            mean_sim = None
        comms.append({"community_id": c, "size": len(members), "members": members,
                      "intra_mean_similarity": mean_sim})
    return {"modularity": q, "community_count": len(comms), "communities": comms}


@dataclass
class NetworkReport:
    n: int
    E: int
    density: float
    component_count: int
    lcc_size: int
    lcc_avg_shortest_path: Optional[float]
    avg_clustering: float
    degree_stats: dict
    top5: dict
    correlation: Optional[dict]
    communities: dict
    threshold: Optional[float] = None
    fusion_weights: Optional[dict] = None

    def to_dict(self) -> dict:
        return asdict(self)


def report_json(report: NetworkReport) -> str:
    return io.dumps_canonical(report.to_dict())


def build_report(g: InfluenceGraph, table=None, R=None, communities=None,
                 threshold=None, fusion_weights=None) -> NetworkReport:
    comps = connected_components(g)
    lcc = comps[0] if comps else set()
    try:
        asp = average_shortest_path(g, lcc) if len(lcc) >= 2 else None
    except GraphError:
        asp = None
    top5 = {m: [{"poet_id": p, "value": v} for p, v in table.top(m, 5)]
            for m in METRICS} if table is not None else {}
    corr = None
    if R is not None:
        corr = {a: {b: float(R[i][j]) for j, b in enumerate(METRICS)}
                for i, a in enumerate(METRICS)}
    return NetworkReport(
        n=g.n, E=g.edge_count, density=density(g), component_count=len(comps),
        lcc_size=len(lcc), lcc_avg_shortest_path=asp, avg_clustering=average_clustering(g),
        degree_stats=degree_stats(g).as_dict(), top5=top5, correlation=corr,
        communities=communities or {}, threshold=threshold, fusion_weights=fusion_weights)


def stage_report(cfg: PipelineConfig, out: Path, warn):
    g = _load_graph(out)
    table = io.read_centrality_csv(out / "centrality.csv")
    R = None
    if (out / "correlation.csv").exists():
        R = np.array([[float(x) for x in r[1:]] for r in io.read_rows(out / "correlation.csv")[1:]])
    comms = json.loads((out / "communities.json").read_text(encoding="utf-8"))
    gp = json.loads((out / "graph_params.json").read_text(encoding="utf-8"))
    fw = json.loads((out / "fusion.json").read_text(encoding="utf-8"))["fusion_weights"]
    report = build_report(g, table, R, comms, gp["threshold"], fw)
    (out / "report.json").write_text(report_json(report) + "\n", encoding="utf-8")
    files = ["report.json"]
    if cfg.figures and R is not None:
        from .plotting import render_all
        files += render_all(out, degree_histogram(g), edge_weight_histogram(g, cfg.bin_count),
                            table, R)
    return files, report


STAGE_FUNCS = {
    "ingest": stage_ingest,
    "features": stage_features,
    "similarity": stage_similarity,
    "graph": stage_graph,
    "analyze": stage_analyze,
    "communities": stage_communities,
    "report": stage_report,
}


def run_stage(name: str, cfg: PipelineConfig):
    """Run one stage against ``cfg.output_dir`` and record it in the MANIFEST."""
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = Manifest(out)
    stage_warnings = []

    def warn(msg):
        log.warning("[%s] %s", name, msg)
        stage_warnings.append(msg)

    try:
        result = STAGE_FUNCS[name](cfg, out, warn)
    except Exception as exc:
        manifest.record(name, [], stage_warnings, status="failed",
                        error=f"{type(exc).__name__}: {exc}")
        raise PipelineError(name, exc) from exc
    files, value = result if isinstance(result, tuple) else (result, None)
    manifest.record(name, files, stage_warnings)
    return value


def run(cfg: PipelineConfig) -> NetworkReport:
    """Run every stage in order and return the final report."""
    report = None
    for name in STAGES:
        report = run_stage(name, cfg)
    return report

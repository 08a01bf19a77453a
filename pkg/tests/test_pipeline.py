import hashlib
import json
from dataclasses import replace
from pathlib import Path

import pytest

from poetgraph import io
from poetgraph.errors import PipelineError
from poetgraph.graph import connected_components, density
from poetgraph.metrics import average_clustering
from poetgraph.pipeline import (STAGES, NetworkReport, PipelineConfig, build_report,
                                report_json, run, run_stage)
from poetgraph.similarity import DIMENSIONS

from conftest import make_graph


def fixture_config(fixture_dir, out, **kw):
    cfg = PipelineConfig.from_file(Path(fixture_dir) / "config.ini")
    cfg.output_dir = str(out)
    return replace(cfg, **kw)


@pytest.fixture(scope="module")
def full_run(fixture_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    report = run(fixture_config(fixture_dir, out, figures=False))
    return out, report


class TestConfig:
    def test_defaults(self):
        cfg = PipelineConfig()
        assert cfg.min_lines == 500 and cfg.threshold == 0.0 and cfg.seed == 0
        assert abs(sum(cfg.fusion.weights) - 1) < 1e-12

    def test_from_file(self, tmp_path):
        (tmp_path / "c.ini").write_text(
            "[input]\ncorpus = data/c.jsonl\nmin_lines = 12\n"
            "[fusion]\nweights = 0.2, 0.2, 0.2, 0.2, 0.2\n"
            "[graph]\nthreshold = 0.4  # inline comment\ntop_k = 3\n"
            "[metrics]\nweighted_paths = yes\n[community]\nseed = 9\n"
            "[output]\ndir = out\nfigures = false\n")
        cfg = PipelineConfig.from_file(tmp_path / "c.ini")
        assert cfg.corpus_path == str(tmp_path / "data/c.jsonl")
        assert cfg.output_dir == str(tmp_path / "out")
        assert (cfg.min_lines, cfg.threshold, cfg.top_k, cfg.seed) == (12, 0.4, 3, 9)
        assert cfg.weighted_paths and not cfg.figures
        assert cfg.fusion.weights == (0.2,) * 5
        assert cfg.word_embeddings_path is None

    def test_bad_weights(self, tmp_path):
        (tmp_path / "c.ini").write_text("[fusion]\nweights = 0.5, 0.5, 0.5, 0, 0\n")
        with pytest.raises(ValueError):
            PipelineConfig.from_file(tmp_path / "c.ini")


class TestFullRun:
    def test_outputs(self, full_run):
        out, report = full_run
        assert report.n == 30
        expected = ["nodes.csv", "fused.csv", "edges.tsv", "graph.graphml", "centrality.csv",
                    "correlation.csv", "communities.csv", "communities.json", "report.json",
                    "MANIFEST"] + [f"similarity_{d}.csv" for d in DIMENSIONS]
        for name in expected:
            assert (out / name).exists(), name

    def test_manifest(self, full_run):
        out, _ = full_run
        m = json.loads((out / "MANIFEST").read_text())
        assert m["complete"] is True
        assert sorted(m["stages"]) == sorted(STAGES)
        assert m["files"]["report.json"] == hashlib.sha256(
            (out / "report.json").read_bytes()).hexdigest()
        # two fixture poets fall below min_lines
        assert any("below min_lines" in w for w in m["warnings"]["ingest"])

    def test_similarity_files_valid(self, full_run):
        out, _ = full_run
        for name in [f"similarity_{d}.csv" for d in DIMENSIONS] + ["fused.csv"]:
            io.read_similarity_csv(out / name).check()

    def test_report_consistent_with_edges(self, full_run):
        out, report = full_run
        ids = [r[0] for r in io.read_rows(out / "nodes.csv")[1:]]
        g = io.read_edges_tsv(out / "edges.tsv", ids)
        assert report.E == g.edge_count
        assert report.density == density(g)
        assert report.component_count == len(connected_components(g))
        assert report.avg_clustering == average_clustering(g)
        assert report.degree_stats["mean"] == pytest.approx(2 * g.edge_count / g.n)
        on_disk = json.loads((out / "report.json").read_text())
        assert on_disk["E"] == report.E

    def test_target_density(self, full_run):
        out, report = full_run
        assert abs(report.density - 0.3) <= 1 / (30 * 29 / 2) + 1e-12

    def test_communities(self, full_run):
        out, report = full_run
        c = json.loads((out / "communities.json").read_text())
        assert c["community_count"] == len(c["communities"])
        assert sum(x["size"] for x in c["communities"]) == 30
        assert report.communities["modularity"] > 0.2
        sizes = [x["size"] for x in c["communities"]]
        assert sizes == sorted(sizes, reverse=True)

    def test_schools_recovered(self, full_run):
        # fixture poet<k> belongs to school k % 4
        out, _ = full_run
        rows = io.read_rows(out / "communities.csv")[1:]
        by_comm = {}
        for pid, c in rows:
            by_comm.setdefault(c, set()).add(int(pid[len("poet"):]) % 4)
        assert all(len(s) == 1 for s in by_comm.values())


def test_three_poet_fixture(tmp_path):
    from poetgraph.synthetic import generate
    fx = generate(tmp_path / "fx", n_poets=3, seed=1)
    report = run(fixture_config(fx, tmp_path / "out", min_lines=1, target_density=None))
    assert report.n == 3
    m = json.loads((tmp_path / "out" / "MANIFEST").read_text())
    assert m["complete"] is True
    for name in m["files"]:
        assert (tmp_path / "out" / name).exists()


class TestDegradedInputs:
    def test_missing_word_embeddings(self, fixture_dir, tmp_path):
        cfg = fixture_config(fixture_dir, tmp_path, word_embeddings_path=None, figures=False)
        report = run(cfg)
        assert report.fusion_weights["semantic"] == 0.0
        assert abs(sum(report.fusion_weights.values()) - 1) < 1e-12
        m = json.loads((tmp_path / "MANIFEST").read_text())
        assert any("semantic" in w for w in m["warnings"]["similarity"])

    def test_stage_failure_recorded(self, tmp_path):
        cfg = PipelineConfig(output_dir=str(tmp_path))
        with pytest.raises(PipelineError) as err:
            run_stage("features", cfg)
        assert err.value.stage == "features"
        m = json.loads((tmp_path / "MANIFEST").read_text())
        assert m["stages"]["features"]["status"] == "failed"
        assert m["complete"] is False

    def test_no_corpus(self, tmp_path):
        with pytest.raises(PipelineError, match="no corpus"):
            run_stage("ingest", PipelineConfig(output_dir=str(tmp_path)))


class TestReport:
    def test_empty_graph(self):
        r = build_report(make_graph(4, []))
        assert r.component_count == 4 and r.E == 0 and r.density == 0.0
        assert r.lcc_avg_shortest_path is None

    def test_json_round_trip(self, full_run):
        _, report = full_run
        s = report_json(report)
        data = json.loads(s)
        assert list(data) == sorted(data)
        assert NetworkReport(**data).E == report.E
        assert report_json(NetworkReport(**data)) == s


def test_deterministic(fixture_dir, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    run(fixture_config(fixture_dir, a))
    run(fixture_config(fixture_dir, b))
    files_a = sorted(p.relative_to(a) for p in a.rglob("*") if p.is_file())
    files_b = sorted(p.relative_to(b) for p in b.rglob("*") if p.is_file())
    assert files_a == files_b
    assert any(str(p).endswith(".png") for p in files_a)
    for rel in files_a:
        assert (a / rel).read_bytes() == (b / rel).read_bytes(), rel

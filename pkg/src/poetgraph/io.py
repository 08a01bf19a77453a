"""File formats: similarity CSVs, edge lists, GraphML, centrality and community tables."""
from __future__ import annotations

import csv
import json
from pathlib import Path
from xml.sax.saxutils import escape, quoteattr

import numpy as np

from .graph import InfluenceGraph
from .metrics import METRICS, CentralityTable
from .similarity import SimilarityMatrix


def fmt(x) -> str:
    """12 significant digits; integers and strings pass through."""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        v = float(x)
        if v == 0.0:
            return "0"
        return f"{v:.12g}"
    return str(x)


def round12(x: float) -> float:
    return float(fmt(float(x)))


def write_rows(path, rows, delimiter=",") -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        for row in rows:
            w.writerow([fmt(x) for x in row])


def read_rows(path, delimiter=","):
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.reader(fh, delimiter=delimiter))


def write_similarity_csv(m: SimilarityMatrix, path) -> None:
    rows = [["poet_id"] + list(m.poet_ids)]
    for pid, vals in zip(m.poet_ids, m.values):
        rows.append([pid] + [float(v) for v in vals])
    write_rows(path, rows)


def read_similarity_csv(path) -> SimilarityMatrix:
    rows = read_rows(path)
    ids = rows[0][1:]
    if [r[0] for r in rows[1:]] != ids:
        raise ValueError(f"{path}: row and column poet ids differ")
    vals = np.array([[float(x) for x in r[1:]] for r in rows[1:]]).reshape(len(ids), len(ids))
    return SimilarityMatrix(ids, vals)


def write_edges_tsv(g: InfluenceGraph, path) -> None:
    rows = [["source_id", "target_id", "weight"]]
    rows += [[g.node_ids[i], g.node_ids[j], w] for i, j, w in g.edges]
    write_rows(path, rows, delimiter="\t")


def read_edges_tsv(path, node_ids) -> InfluenceGraph:
    rows = read_rows(path, delimiter="\t")[1:]
    return InfluenceGraph.from_id_edges(list(node_ids), [(a, b, float(w)) for a, b, w in rows])


def write_graphml(g: InfluenceGraph, path, names=None) -> None:
    names = names or {}
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<graphml xmlns="http://graphml.graphdrawing.org/xmlns">',
        '  <key id="name" for="node" attr.name="name" attr.type="string"/>',
        '  <key id="weight" for="edge" attr.name="weight" attr.type="double"/>',
        '  <graph id="influence" edgedefault="undirected">',
    ]
    for v in g.node_ids:
        out.append(f"    <node id={quoteattr(v)}>"
                   f'<data key="name">{escape(names.get(v, v))}</data></node>')
    for k, (i, j, w) in enumerate(g.edges):
        out.append(f'    <edge id="e{k}" source={quoteattr(g.node_ids[i])} '
                   f'target={quoteattr(g.node_ids[j])}><data key="weight">{fmt(w)}</data></edge>')
    out += ["  </graph>", "</graphml>", ""]
    Path(path).write_text("\n".join(out), encoding="utf-8")


def write_centrality_csv(table: CentralityTable, path) -> None:
    rows = [["poet_id"] + list(METRICS)]
    for i, v in enumerate(table.node_ids):
        rows.append([v] + [float(table.columns[m][i]) for m in METRICS])
    write_rows(path, rows)


def read_centrality_csv(path) -> CentralityTable:
    rows = read_rows(path)
    header = rows[0][1:]
    ids = [r[0] for r in rows[1:]]
    cols = {m: np.array([float(r[1 + k]) for r in rows[1:]]) for k, m in enumerate(header)}
    return CentralityTable(ids, cols)


def write_correlation_csv(R, path) -> None:
    rows = [["metric"] + list(METRICS)]
    for name, vals in zip(METRICS, R):
        rows.append([name] + [float(v) for v in vals])
    write_rows(path, rows)


def write_json(obj, path) -> None:
    Path(path).write_text(dumps_canonical(obj) + "\n", encoding="utf-8")


def _round_floats(obj):
    if isinstance(obj, dict):
        return {str(k): _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return round12(obj)
    return obj


def dumps_canonical(obj) -> str:
    """JSON with sorted keys and floats rounded to 12 significant digits."""
    return json.dumps(_round_floats(obj), sort_keys=True, indent=2, ensure_ascii=False,
                      allow_nan=False)

"""Matplotlib figures for the report stage.

Figures are written as PNG with the ``Software`` metadata entry stripped so
that reruns produce byte-identical files.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .metrics import METRICS  # noqa: E402

PNG_META = {"Software": None}

STYLE = {
    "figure.dpi": 100,
    "savefig.dpi": 100,
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.spines.top": False,
    "axes.spines.right": False,
}


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, format="png", metadata=PNG_META)
    plt.close(fig)


def plot_degree_distribution(degree_hist, path):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(6, 3.5))
        ks = [k for k, _ in degree_hist]
        cs = [c for _, c in degree_hist]
        ax.bar(ks, cs, width=0.8, color="#4c72b0")
        ax.set_xlabel("degree")
        ax.set_ylabel("poets")
        ax.set_title("Degree distribution")
        _save(fig, path)


def plot_edge_weight_histogram(weight_hist, path):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(6, 3.5))
        if weight_hist:
            lo = np.array([b[0] for b in weight_hist])
            hi = np.array([b[1] for b in weight_hist])
            counts = [b[2] for b in weight_hist]
            width = np.where(hi > lo, hi - lo, 0.01)
            ax.bar(lo, counts, width=width, align="edge", color="#55a868", edgecolor="white")
        ax.set_xlabel("edge weight (fused similarity)")
        ax.set_ylabel("edges")
        ax.set_title("Edge weight distribution")
        _save(fig, path)


def plot_top5(table, path, k=5):
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, len(METRICS), figsize=(15, 3.2))
        for ax, metric in zip(axes, METRICS):
            top = table.top(metric, k)[::-1]
            ax.barh([pid for pid, _ in top], [v for _, v in top], color="#c44e52")
            ax.set_title(metric)
        _save(fig, path)


def plot_centrality_distribution(table, metric, path, bins=20):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        ax.hist(table.columns[metric], bins=bins, color="#8172b2", edgecolor="white")
        ax.set_xlabel(f"{metric} centrality")
        ax.set_ylabel("poets")
        _save(fig, path)


def plot_correlation(R, path):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.8, 4))
        im = ax.imshow(R, vmin=-1, vmax=1, cmap="coolwarm")
        ax.set_xticks(range(len(METRICS)), METRICS, rotation=45, ha="right")
        ax.set_yticks(range(len(METRICS)), METRICS)
        for i in range(len(METRICS)):
            for j in range(len(METRICS)):
                ax.text(j, i, f"{R[i][j]:.2f}", ha="center", va="center", fontsize=8)
        fig.colorbar(im, ax=ax, shrink=0.8)
        _save(fig, path)


def render_all(out_dir, degree_hist, weight_hist, table, R) -> list[str]:
    fig_dir = Path(out_dir) / "figures"
    fig_dir.mkdir(exist_ok=True)
    written = []

    def go(name, fn, *args):
        fn(*args, fig_dir / name)
        written.append(f"figures/{name}")

    go("degree_distribution.png", plot_degree_distribution, degree_hist)
    go("edge_weights.png", plot_edge_weight_histogram, weight_hist)
    go("top5.png", plot_top5, table)
    go("betweenness_distribution.png", lambda t, p: plot_centrality_distribution(t, "betweenness", p), table)
    go("eigenvector_distribution.png", lambda t, p: plot_centrality_distribution(t, "eigenvector", p), table)
    go("correlation.png", plot_correlation, R)
    return written

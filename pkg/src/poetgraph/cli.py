"""Command-line entry point: ``poetgraph <stage> [options]``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import pipeline, synthetic
from .errors import PoetGraphError
from .pipeline import STAGES, PipelineConfig


def _add_common(p, default):
    p.add_argument("--config", default=default, help="INI config file")
    p.add_argument("--output", default=default, help="output directory")
    p.add_argument("--seed", type=int, default=default, help="Louvain visit-order seed")
    p.add_argument("--threshold", type=float, default=default, help="edge similarity threshold")
    p.add_argument("--target-density", type=float, default=default,
                   help="pick the threshold that gives this graph density")
    p.add_argument("--corpus", default=default, help="corpus JSONL file")
    p.add_argument("--word-embeddings", default=default)
    p.add_argument("--poem-embeddings", default=default)
    p.add_argument("--min-lines", type=int, default=default)
    p.add_argument("--no-figures", action="store_true", default=default)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="poetgraph",
        description="Build and analyse a poet influence graph from a corpus.")
    _add_common(parser, None)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in STAGES + ("all",):
        sp = sub.add_parser(name, help=f"run the {name} stage" if name != "all" else "run every stage")
        _add_common(sp, argparse.SUPPRESS)
    sp = sub.add_parser("synth", help="write a synthetic fixture (corpus, embeddings, config)")
    sp.add_argument("directory")
    sp.add_argument("--poets", type=int, default=32)
    sp.add_argument("--fixture-seed", type=int, default=7)
    return parser


def config_from_args(args) -> PipelineConfig:
    cfg = PipelineConfig.from_file(args.config) if args.config else PipelineConfig()
    if args.output is not None:
        cfg.output_dir = args.output
    if args.seed is not None:
        cfg.seed = args.seed
    if args.threshold is not None:
        cfg.threshold = args.threshold
        cfg.target_density = None
    if args.target_density is not None:
        cfg.target_density = args.target_density
    if args.corpus is not None:
        cfg.corpus_path = args.corpus
    if args.word_embeddings is not None:
        cfg.word_embeddings_path = args.word_embeddings
    if args.poem_embeddings is not None:
        cfg.poem_embeddings_path = args.poem_embeddings
    if args.min_lines is not None:
        cfg.min_lines = args.min_lines
    if args.no_figures:
        cfg.figures = False
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "synth":
        out = synthetic.generate(args.directory, n_poets=args.poets, seed=args.fixture_seed)
        print(f"fixture written to {out}")
        return 0
    cfg = config_from_args(args)
    try:
        if args.command == "all":
            report = pipeline.run(cfg)
        else:
            report = pipeline.run_stage(args.command, cfg)
    except PoetGraphError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if report is not None:
        print(f"n={report.n} E={report.E} density={report.density:.4f} "
              f"components={report.component_count} "
              f"communities={report.communities.get('community_count')}")
    print(f"outputs in {Path(cfg.output_dir)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

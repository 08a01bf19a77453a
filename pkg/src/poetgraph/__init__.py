"""Multi-dimensional similarity graphs of poets: features, fusion, centrality, communities."""

from .community import CommunityPartition, brute_force_best_partition, louvain, modularity
from .corpus import Corpus, PoemRecord, PoetRecord, load_corpus, normalize_corpus, normalize_text
from .graph import InfluenceGraph, build_graph
from .metrics import centrality_table
from .pipeline import PipelineConfig, run
from .similarity import SimilarityMatrix, fuse

__all__ = [
    "CommunityPartition", "Corpus", "InfluenceGraph", "PipelineConfig", "PoemRecord",
    "PoetRecord", "SimilarityMatrix", "brute_force_best_partition", "build_graph",
    "centrality_table", "fuse", "load_corpus", "louvain", "modularity", "normalize_corpus",
    "normalize_text", "run",
]

__version__ = "0.1.0"

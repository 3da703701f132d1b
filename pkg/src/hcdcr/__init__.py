"""Hierarchical cross-document coreference: data model, metrics, inference."""

from .coref_metrics import PRF, b_cubed, ceaf_e, conll_f1, filter_singletons, lea, muc
from .hierarchy_metrics import cluster_distance, hierarchy_score, path_distance_score
from .inference import ScorerConfig, run_pipeline
from .io import load_corpus, write_corpus
from .model import ClusterGraph, Document, Mention, Topic, ValidationError, transitive_closure

__version__ = "0.1.0"

__all__ = [
    "PRF", "b_cubed", "ceaf_e", "conll_f1", "filter_singletons", "lea", "muc",
    "cluster_distance", "hierarchy_score", "path_distance_score",
    "ScorerConfig", "run_pipeline", "load_corpus", "write_corpus",
    "ClusterGraph", "Document", "Mention", "Topic", "ValidationError", "transitive_closure",
]

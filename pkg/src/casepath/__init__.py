"""Case-based 2-hop link prediction over in-memory knowledge graphs.

Predicts outgoing properties of an unseen "effect" entity from a known
"cause" entity by retrieving similar cause/effect pairs from the graph,
sampling bounded relation paths from them, and replaying the best-scoring
paths from the query cause. No training step is involved; everything is
computed from count statistics and graph traversal.
"""

from .graph import DirectedStep, KnowledgeGraph, ingest_triples
from .similarity import SimilarityIndex
from .cases import Case, PredictionQuery, candidate_cases, select_cases
from .paths import PathBag, ScoredPath, follow, sample_paths, score_paths
from .predict import EngineParams, RankedPredictions, combine_scores, predict, refine
from .split import InductiveSplit, load_split, make_split, validate_split, write_split
from .evaluate import EvalReport, evaluate

__version__ = "0.1.0"

__all__ = [
    "Case",
    "DirectedStep",
    "EngineParams",
    "EvalReport",
    "InductiveSplit",
    "KnowledgeGraph",
    "PathBag",
    "PredictionQuery",
    "RankedPredictions",
    "ScoredPath",
    "SimilarityIndex",
    "candidate_cases",
    "combine_scores",
    "evaluate",
    "follow",
    "ingest_triples",
    "load_split",
    "make_split",
    "predict",
    "refine",
    "sample_paths",
    "score_paths",
    "select_cases",
    "validate_split",
    "write_split",
]

"""Weight-aware random walks, skip-gram node embeddings, and edge-weight
recovery experiments on weighted graphs."""

from .analysis import (
    CorrelationResult,
    SweepResult,
    SweepSpec,
    edge_cosine_similarities,
    pearson,
    run_single,
    run_sweep,
    run_threshold_sweep,
    spearman,
)
from .errors import WeightWalkError
from .generators import (
    WeightDistSpec,
    build_model_graph,
    gen_ba,
    gen_complete_from_features,
    gen_er,
    gen_sbm,
    gen_waxman,
)
from .graph import (
    NodeStats,
    WeightedGraph,
    build_graph,
    node_stats,
    shuffle_weights,
    threshold_by_percentile,
)
from .sgns import EmbeddingMatrix, TrainConfig, build_noise_table, init_embeddings, sgns_pair_loss, train
from .walks import WalkConfig, WalkCorpus, build_corpus, sample_walk, transition_distribution

__version__ = "0.1.0"

__all__ = [
    "WeightedGraph",
    "NodeStats",
    "build_graph",
    "node_stats",
    "shuffle_weights",
    "threshold_by_percentile",
    "WeightDistSpec",
    "gen_er",
    "gen_sbm",
    "gen_waxman",
    "gen_ba",
    "gen_complete_from_features",
    "build_model_graph",
    "WalkConfig",
    "WalkCorpus",
    "transition_distribution",
    "sample_walk",
    "build_corpus",
    "TrainConfig",
    "EmbeddingMatrix",
    "init_embeddings",
    "build_noise_table",
    "sgns_pair_loss",
    "train",
    "pearson",
    "spearman",
    "edge_cosine_similarities",
    "run_single",
    "run_sweep",
    "run_threshold_sweep",
    "SweepSpec",
    "SweepResult",
    "CorrelationResult",
    "WeightWalkError",
    "__version__",
]

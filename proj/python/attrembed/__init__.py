"""Node embeddings for attributed networks.

Jointly optimizes edge-level proximity, attribute-enhanced neighborhood
reconstruction and random-walk co-occurrence, then evaluates the embeddings
on link prediction or node classification.
"""

from ._core import (
    Activation,
    AttributedGraph,
    EpochStats,
    EvalReport,
    ModelConfig,
    TrainResult,
    __version__,
    attribute_similarity,
    generate_sbm,
    link_prediction_eval,
    load_citation_dataset,
    load_edge_list,
    node_classification_eval,
    reconstruction,
    train,
)

__all__ = [
    "Activation",
    "AttributedGraph",
    "EpochStats",
    "EvalReport",
    "ModelConfig",
    "TrainResult",
    "__version__",
    "attribute_similarity",
    "generate_sbm",
    "link_prediction_eval",
    "load_citation_dataset",
    "load_edge_list",
    "node_classification_eval",
    "reconstruction",
    "train",
]

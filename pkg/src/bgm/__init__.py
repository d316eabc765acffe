"""Cross-domain top-N recommendation via behavior graph matching.

The pipeline expands each domain's rating matrix into (item, rating) nodes,
links nodes by the Jaccard similarity of their user sets, arranges the
resulting graphs as trees, matches source trees to target trees, and uses the
matched node pairs as supervision for a naive Bayes rating model.  The model
then ranks target-domain items for users who have only source-domain history.
"""

__version__ = "0.1.0"

from .dataset import (
    ContentCatalog,
    EventLog,
    EventRecord,
    RatingMatrix,
    events_to_ratings,
    export_content,
    export_ratings,
    ingest_content,
    ingest_events,
    ingest_ratings,
    jaccard,
)
from .errors import (
    BgmError,
    ColdStartError,
    ConfigError,
    DegenerateVarianceError,
    DuplicateRatingError,
    ParseError,
    RatingRangeError,
    StructuralError,
    TrainingError,
    ValidationError,
)
from .evaluation import (
    BenchmarkSettings,
    FoldPlan,
    PrecisionReport,
    cosine,
    is_true_positive,
    kfold_split,
    precision_at_n,
    run_benchmark,
)
from .graphs import (
    BehaviorForest,
    BehaviorGraph,
    GraphEdge,
    RatedItemNode,
    build_forest,
    build_forest_from_matrix,
    expand_items,
    export_forest,
    load_forest,
)
from .matching import (
    Bridge,
    TreePair,
    export_bridges,
    match_forests,
    match_nodes,
    pair_trees,
    tree_similarity,
)
from .recommend import (
    FeatureMatrix,
    Recommendation,
    build_feature_matrix,
    expected_rating,
    knn_cross_domain_recommend,
    pearson,
    popularity_recommend,
    rank_matrix,
    recommend_top_n,
)
from .stats import TTestResult, paired_t_test, regularized_incomplete_beta
from .synth import SynthConfig, SyntheticDataset, generate_synthetic
from .training import (
    DistributionVector,
    NaiveBayesModel,
    TrainConfig,
    TrainingSample,
    build_training_set,
    train,
)
from .trees import BehaviorTree, build_tree, build_trees, export_trees, load_trees

__all__ = [
    "__version__",
    "BgmError",
    "ValidationError",
    "ParseError",
    "RatingRangeError",
    "DuplicateRatingError",
    "StructuralError",
    "ColdStartError",
    "TrainingError",
    "DegenerateVarianceError",
    "ConfigError",
    "RatingMatrix",
    "ContentCatalog",
    "EventRecord",
    "EventLog",
    "jaccard",
    "ingest_ratings",
    "export_ratings",
    "ingest_content",
    "export_content",
    "ingest_events",
    "events_to_ratings",
    "RatedItemNode",
    "GraphEdge",
    "BehaviorGraph",
    "BehaviorForest",
    "expand_items",
    "build_forest",
    "build_forest_from_matrix",
    "export_forest",
    "load_forest",
    "BehaviorTree",
    "build_tree",
    "build_trees",
    "export_trees",
    "load_trees",
    "TreePair",
    "Bridge",
    "tree_similarity",
    "pair_trees",
    "match_nodes",
    "match_forests",
    "export_bridges",
    "TrainingSample",
    "TrainConfig",
    "DistributionVector",
    "NaiveBayesModel",
    "build_training_set",
    "train",
    "FeatureMatrix",
    "Recommendation",
    "build_feature_matrix",
    "expected_rating",
    "rank_matrix",
    "recommend_top_n",
    "popularity_recommend",
    "pearson",
    "knn_cross_domain_recommend",
    "TTestResult",
    "paired_t_test",
    "regularized_incomplete_beta",
    "SynthConfig",
    "SyntheticDataset",
    "generate_synthetic",
    "FoldPlan",
    "kfold_split",
    "cosine",
    "is_true_positive",
    "precision_at_n",
    "BenchmarkSettings",
    "PrecisionReport",
    "run_benchmark",
]

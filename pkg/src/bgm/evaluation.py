"""Offline evaluation: k-fold protocol, precision with a similarity-based hit
rule, and the benchmark that compares the recommender against the baselines.

The protocol hides each test fold's target ratings.  Source-domain behavior
uses every user (nothing in the source is ever held out), while target-domain
behavior, training, and the baselines see only the training folds.  Held-out
ratings are consulted exclusively when a test user's recommendations are
scored, and the report records per-user precision, per-method means, and
paired t-tests between methods.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .dataset import ContentCatalog, RatingMatrix
from .errors import ConfigError, DegenerateVarianceError, ValidationError
from .graphs import build_forest_from_matrix
from .matching import match_forests
from .recommend import (
    knn_cross_domain_recommend,
    popularity_recommend,
    recommend_top_n,
)
from .stats import TTestResult, paired_t_test
from .training import TrainConfig, build_training_set, train
from .trees import build_trees

METHOD_BGM = "bgm"
METHOD_POPULARITY = "popularity"
METHOD_KNN = "knn"
ALL_METHODS = (METHOD_BGM, METHOD_POPULARITY, METHOD_KNN)


@dataclass(frozen=True)
class FoldPlan:
    k: int
    seed: int
    folds: tuple[tuple[str, ...], ...]

    def all_users(self) -> frozenset[str]:
        return frozenset(user for fold in self.folds for user in fold)


def kfold_split(users: Iterable[str], k: int, seed: int) -> FoldPlan:
    """Shuffle the users with the seed, then cut the order into k contiguous folds.

    Fold sizes differ by at most one, every user lands in exactly one fold,
    and the same (users, k, seed) always yields the same plan.
    """
    ordered = sorted(set(users))
    if k < 2:
        raise ConfigError(f"fold count must be >= 2, got {k}")
    if k > len(ordered):
        raise ConfigError(
            f"fold count {k} exceeds the {len(ordered)} available users"
        )
    random.Random(seed).shuffle(ordered)
    base, extra = divmod(len(ordered), k)
    folds = []
    start = 0
    for index in range(k):
        size = base + (1 if index < extra else 0)
        folds.append(tuple(sorted(ordered[start : start + size])))
        start += size
    return FoldPlan(k=k, seed=seed, folds=tuple(folds))


def cosine(a: Sequence[float], b: Sequence[float]) -> float:
    """Cosine similarity; 0.0 when either vector has zero norm."""
    if len(a) != len(b):
        raise ValidationError(f"vector length mismatch: {len(a)} vs {len(b)}")
    dot = sum(x * y for x, y in zip(a, b))
    norm_a = math.sqrt(sum(x * x for x in a))
    norm_b = math.sqrt(sum(y * y for y in b))
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    return dot / (norm_a * norm_b)


def is_true_positive(
    rec_item: str,
    positive_items: frozenset[str] | set[str],
    target_content: ContentCatalog,
    tau_sim: float = 0.5,
    coverage: float = 0.8,
) -> bool:
    """Hit rule: an exact held-out positive always counts; otherwise the
    recommendation must be cosine-similar (>= tau_sim) to at least
    ceil(coverage * |positives|) of the positive items' content vectors.
    With no positives nothing counts as a hit."""
    if not positive_items:
        return False
    if rec_item in positive_items:
        return True
    needed = math.ceil(coverage * len(positive_items))
    rec_vector = target_content.vector(rec_item)
    close = 0
    for item in positive_items:
        if cosine(rec_vector, target_content.vector(item)) >= tau_sim:
            close += 1
            if close >= needed:
                return True
    return False


def precision_at_n(
    recommended: Sequence[str],
    positive_items: frozenset[str] | set[str],
    target_content: ContentCatalog,
    n: int,
    tau_sim: float = 0.5,
    coverage: float = 0.8,
) -> float:
    """True positives among the first min(n, len) recommendations, divided by n."""
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")
    hits = sum(
        1
        for item in recommended[:n]
        if is_true_positive(item, positive_items, target_content, tau_sim, coverage)
    )
    return hits / n


def _batch_true_positive_flags(
    recommended: Sequence[str],
    positive_items: frozenset[str],
    target_content: ContentCatalog,
    tau_sim: float,
    coverage: float,
) -> list[bool]:
    """Vectorized is_true_positive over a recommendation list (same rule)."""
    if not positive_items or not recommended:
        return [False] * len(recommended)
    positives = sorted(positive_items)
    pos_matrix = np.array([target_content.vector(item) for item in positives])
    rec_matrix = np.array([target_content.vector(item) for item in recommended])
    pos_norms = np.linalg.norm(pos_matrix, axis=1)
    rec_norms = np.linalg.norm(rec_matrix, axis=1)
    # Zero-norm vectors have cosine 0 against everything by definition.
    safe_pos = np.where(pos_norms == 0.0, 1.0, pos_norms)
    safe_rec = np.where(rec_norms == 0.0, 1.0, rec_norms)
    sims = (rec_matrix / safe_rec[:, None]) @ (pos_matrix / safe_pos[:, None]).T
    sims[rec_norms == 0.0, :] = 0.0
    sims[:, pos_norms == 0.0] = 0.0
    needed = math.ceil(coverage * len(positives))
    close_enough = (sims >= tau_sim).sum(axis=1) >= needed
    exact = np.array([item in positive_items for item in recommended])
    return list(np.logical_or(close_enough, exact))


@dataclass(frozen=True)
class BenchmarkSettings:
    threshold: float
    seed: int
    folds: int = 10
    methods: tuple[str, ...] = ALL_METHODS
    n_values: tuple[int, ...] = (5, 10, 15, 20, 50, 100)
    t_test_n_values: tuple[int, ...] = (5, 10, 15, 20)
    drop_singletons: bool = False
    unique_tree_pairing: bool = False
    classifier: str = "naive_bayes"
    bins: int = 5
    min_train_samples: int = 10
    knn_neighbors: int = 20
    tau_sim: float = 0.5
    coverage: float = 0.8
    positive_threshold: int | None = None
    progress: Callable[[str], None] | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        unknown = [m for m in self.methods if m not in ALL_METHODS]
        if unknown:
            raise ConfigError(f"unknown method {unknown[0]!r}")
        if not self.methods:
            raise ConfigError("methods must not be empty")
        if not self.n_values or any(n < 1 for n in self.n_values):
            raise ConfigError(f"n_values must be positive, got {self.n_values}")

    def report_settings(self) -> dict:
        return {
            "threshold": self.threshold,
            "seed": self.seed,
            "folds": self.folds,
            "methods": list(self.methods),
            "n_values": list(self.n_values),
            "t_test_n_values": list(self.t_test_n_values),
            "drop_singletons": self.drop_singletons,
            "unique_tree_pairing": self.unique_tree_pairing,
            "classifier": self.classifier,
            "bins": self.bins,
            "min_train_samples": self.min_train_samples,
            "knn_neighbors": self.knn_neighbors,
            "tau_sim": self.tau_sim,
            "coverage": self.coverage,
            "positive_threshold": self.positive_threshold,
        }


@dataclass(frozen=True)
class PrecisionRow:
    fold: int
    user_id: str
    method: str
    n: int
    precision: float


@dataclass(frozen=True)
class TTestEntry:
    method_a: str
    method_b: str
    n: int
    t: float | None
    df: int
    p: float | None
    significant: bool
    degenerate: bool = False


@dataclass(frozen=True)
class PrecisionReport:
    settings: dict
    rows: tuple[PrecisionRow, ...]
    aggregates: dict[str, dict[int, float]]
    t_tests: tuple[TTestEntry, ...]

    def mean_precision(self, method: str, n: int) -> float:
        return self.aggregates[method][n]

    def to_json_dict(self) -> dict:
        return {
            "settings": self.settings,
            "aggregates": {
                method: {str(n): value for n, value in sorted(by_n.items())}
                for method, by_n in sorted(self.aggregates.items())
            },
            "t_tests": [
                {
                    "method_a": entry.method_a,
                    "method_b": entry.method_b,
                    "n": entry.n,
                    "t": entry.t,
                    "df": entry.df,
                    "p": entry.p,
                    "significant": entry.significant,
                    "degenerate": entry.degenerate,
                }
                for entry in self.t_tests
            ],
            "per_user": [
                {
                    "fold": row.fold,
                    "user_id": row.user_id,
                    "method": row.method,
                    "n": row.n,
                    "precision": row.precision,
                }
                for row in self.rows
            ],
        }

    def summary_rows(self) -> list[tuple[str, int, float]]:
        rows = []
        for method in sorted(self.aggregates):
            for n in sorted(self.aggregates[method]):
                rows.append((method, n, self.aggregates[method][n]))
        return rows


def _fit_bgm(
    source_trees,
    target_train: RatingMatrix,
    source_content: ContentCatalog,
    target_content: ContentCatalog,
    settings: BenchmarkSettings,
    k_source: int,
):
    """Build target-side patterns from training folds only and fit the model."""
    target_forest = build_forest_from_matrix(
        target_train, settings.threshold, drop_singletons=settings.drop_singletons
    )
    target_trees = build_trees(target_forest)
    bridges = match_forests(
        source_trees, target_trees, unique_tree_pairing=settings.unique_tree_pairing
    )
    samples = build_training_set(bridges, source_content, target_content)
    config = TrainConfig(
        k_source=k_source,
        k_target=target_train.k,
        classifier=settings.classifier,
        bins=settings.bins,
        min_samples=settings.min_train_samples,
    )
    return train(samples, config)


def run_benchmark(
    source_ratings: RatingMatrix,
    target_ratings: RatingMatrix,
    source_content: ContentCatalog,
    target_content: ContentCatalog,
    settings: BenchmarkSettings,
) -> PrecisionReport:
    """Cross-validated precision comparison of the configured methods.

    Folds partition the users shared by both domains.  Per fold: the target
    training matrix is the target ratings of every non-test user, source
    behavior comes from all users, and each test user's held-out positives
    (rating >= positive_threshold, default the scale maximum) score the
    methods' top-N lists.
    """
    progress = settings.progress or (lambda message: None)
    source_content.require_items(source_ratings.items())
    target_content.require_items(target_ratings.items())

    shared = sorted(source_ratings.users() & target_ratings.users())
    plan = kfold_split(shared, settings.folds, settings.seed)
    max_n = max(settings.n_values)
    candidate_items = target_content.item_ids()
    positive_threshold = (
        target_ratings.k
        if settings.positive_threshold is None
        else settings.positive_threshold
    )

    source_trees = None
    if METHOD_BGM in settings.methods:
        progress("building source-domain behavior patterns")
        source_forest = build_forest_from_matrix(
            source_ratings, settings.threshold,
            drop_singletons=settings.drop_singletons,
        )
        source_trees = build_trees(source_forest)

    rows: list[PrecisionRow] = []
    for fold_index, test_users in enumerate(plan.folds):
        progress(f"fold {fold_index + 1}/{plan.k}: fitting on training folds")
        test_set = set(test_users)
        train_users = [u for u in target_ratings.users() if u not in test_set]
        target_train = target_ratings.restrict_users(train_users)

        model = None
        if METHOD_BGM in settings.methods:
            model = _fit_bgm(
                source_trees,
                target_train,
                source_content,
                target_content,
                settings,
                k_source=source_ratings.k,
            )
        popularity_list = None
        if METHOD_POPULARITY in settings.methods:
            popularity_list = popularity_recommend(
                target_train, max_n, positive_threshold, items=candidate_items
            )

        progress(f"fold {fold_index + 1}/{plan.k}: evaluating held-out users")
        for user_id in test_users:
            held_out = target_ratings.ratings_of_user(user_id)
            positives = frozenset(
                item for item, rating in held_out.items() if rating >= positive_threshold
            )
            user_source = sorted(source_ratings.ratings_of_user(user_id).items())
            recommendations: dict[str, list[str]] = {}
            if METHOD_BGM in settings.methods:
                recommendations[METHOD_BGM] = [
                    rec.item_id
                    for rec in recommend_top_n(
                        model, user_source, candidate_items,
                        source_content, target_content, max_n,
                    )
                ]
            if METHOD_POPULARITY in settings.methods:
                recommendations[METHOD_POPULARITY] = popularity_list
            if METHOD_KNN in settings.methods:
                recommendations[METHOD_KNN] = knn_cross_domain_recommend(
                    user_id,
                    settings.knn_neighbors,
                    source_ratings,
                    target_train,
                    max_n,
                    positive_threshold,
                    items=candidate_items,
                )
            for method in settings.methods:
                flags = _batch_true_positive_flags(
                    recommendations[method], positives, target_content,
                    settings.tau_sim, settings.coverage,
                )
                hits = 0
                hit_prefix = {}
                for index, flag in enumerate(flags, start=1):
                    hits += bool(flag)
                    hit_prefix[index] = hits
                for n in settings.n_values:
                    hits_at_n = hit_prefix.get(min(n, len(flags)), 0)
                    rows.append(
                        PrecisionRow(
                            fold=fold_index,
                            user_id=user_id,
                            method=method,
                            n=n,
                            precision=hits_at_n / n,
                        )
                    )

    aggregates: dict[str, dict[int, float]] = {}
    series: dict[tuple[str, int], list[float]] = {}
    for method in settings.methods:
        aggregates[method] = {}
        for n in settings.n_values:
            values = [
                row.precision for row in rows if row.method == method and row.n == n
            ]
            series[(method, n)] = values
            aggregates[method][n] = math.fsum(values) / len(values) if values else 0.0

    t_tests: list[TTestEntry] = []
    tested_n = [n for n in settings.t_test_n_values if n in settings.n_values]
    for i, method_a in enumerate(settings.methods):
        for method_b in settings.methods[i + 1 :]:
            for n in tested_n:
                a = series[(method_a, n)]
                b = series[(method_b, n)]
                if len(a) < 2:
                    continue
                try:
                    result: TTestResult = paired_t_test(a, b)
                    t_tests.append(
                        TTestEntry(
                            method_a=method_a,
                            method_b=method_b,
                            n=n,
                            t=result.t,
                            df=result.df,
                            p=result.p,
                            significant=result.p < 0.05,
                        )
                    )
                except DegenerateVarianceError:
                    t_tests.append(
                        TTestEntry(
                            method_a=method_a,
                            method_b=method_b,
                            n=n,
                            t=None,
                            df=len(a) - 1,
                            p=None,
                            significant=False,
                            degenerate=True,
                        )
                    )

    return PrecisionReport(
        settings=settings.report_settings(),
        rows=tuple(rows),
        aggregates=aggregates,
        t_tests=tuple(t_tests),
    )

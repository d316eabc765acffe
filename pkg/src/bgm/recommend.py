"""Top-N recommendation: classifier-driven ranking plus two baselines.

For a candidate target item, every source rating of the user becomes one row
of a feature matrix (the class slot stays empty); the item's rank is the mean
expected rating of those rows under the trained classifier.  The baselines
are a positive-rating popularity count and a cross-domain KNN that finds
neighbors by Pearson correlation over co-rated source items.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dataset import ContentCatalog, RatingMatrix
from .errors import ColdStartError, ConfigError, ValidationError
from .training import DistributionVector, NaiveBayesModel


@dataclass(frozen=True)
class FeatureMatrix:
    """Per-(user, target item) classifier input; one row per source rating."""

    target_item_id: str
    target_features: tuple[float, ...]
    rows: tuple[tuple[tuple[float, ...], int], ...]  # (source features, source rating)

    @property
    def row_count(self) -> int:
        return len(self.rows)

    @property
    def column_count(self) -> int:
        # Source features + source rating + target features + the empty class slot.
        n = len(self.rows[0][0]) if self.rows else 0
        return n + len(self.target_features) + 2


def build_feature_matrix(
    user_source_ratings: Sequence[tuple[str, int]],
    target_item_id: str,
    source_content: ContentCatalog,
    target_content: ContentCatalog,
) -> FeatureMatrix:
    if not user_source_ratings:
        raise ColdStartError("user has no source-domain ratings")
    rows = tuple(
        (source_content.vector(item_id), rating)
        for item_id, rating in user_source_ratings
    )
    return FeatureMatrix(
        target_item_id=target_item_id,
        target_features=target_content.vector(target_item_id),
        rows=rows,
    )


def expected_rating(distribution: DistributionVector) -> float:
    """Mean of the class values 1..k under the distribution."""
    return sum((j + 1) * p for j, p in enumerate(distribution))


def rank_matrix(matrix: FeatureMatrix, model: NaiveBayesModel) -> float:
    """Mean expected rating over the rows of the feature matrix."""
    total = 0.0
    for source_features, source_rating in matrix.rows:
        distribution = model.predict_distribution(
            source_features, source_rating, matrix.target_features
        )
        total += expected_rating(distribution)
    return total / len(matrix.rows)


@dataclass(frozen=True)
class Recommendation:
    item_id: str
    score: float
    position: int


def _batch_scores(
    model: NaiveBayesModel,
    user_source_ratings: Sequence[tuple[str, int]],
    target_items: Sequence[str],
    source_content: ContentCatalog,
    target_content: ContentCatalog,
) -> np.ndarray:
    """Rank scores for every target item at once.

    The naive Bayes score factorizes into a per-row term and a per-item term,
    so the z-by-items grid of posteriors comes from one broadcast sum.  Agrees
    with rank_matrix row by row (same tables, vectorized arithmetic).
    """
    tables = model.log_likelihood_tables()
    k = model.k_target
    prior = np.array(model.log_prior())

    row_logs = np.zeros((len(user_source_ratings), k))
    for row, (item_id, rating) in enumerate(user_source_ratings):
        features = source_content.vector(item_id)
        encoded = model.encode(features, rating, [0.0] * model.m)
        for feature in range(model.n + 1):
            row_logs[row] += tables[feature][encoded[feature]]

    item_logs = np.zeros((len(target_items), k))
    for idx, item_id in enumerate(target_items):
        features = target_content.vector(item_id)
        for j, value in enumerate(features):
            # Tables index by feature position (the source rating sits at n);
            # bin edges cover only the continuous features, so target feature
            # j uses edge slot n + j but table slot n + 1 + j.
            bin_value = model._bin_index(model.n + j, value)
            item_logs[idx] += tables[model.n + 1 + j][bin_value]

    logits = row_logs[:, None, :] + item_logs[None, :, :] + prior[None, None, :]
    logits -= logits.max(axis=2, keepdims=True)
    weights = np.exp(logits)
    posteriors = weights / weights.sum(axis=2, keepdims=True)
    classes = np.arange(1, k + 1, dtype=float)
    expected = posteriors @ classes
    return expected.mean(axis=0)


def recommend_top_n(
    model: NaiveBayesModel,
    user_source_ratings: Sequence[tuple[str, int]],
    target_items: Sequence[str],
    source_content: ContentCatalog,
    target_content: ContentCatalog,
    n: int,
) -> list[Recommendation]:
    """Top-N target items by rank score, ties broken lexically by item id."""
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")
    if not user_source_ratings:
        raise ColdStartError("user has no source-domain ratings")
    if not target_items:
        return []
    scores = _batch_scores(
        model, user_source_ratings, target_items, source_content, target_content
    )
    order = sorted(zip(target_items, scores), key=lambda pair: (-pair[1], pair[0]))
    return [
        Recommendation(item_id=item_id, score=float(score), position=position)
        for position, (item_id, score) in enumerate(order[:n], start=1)
    ]


# -- baselines ----------------------------------------------------------------


def positive_counts(
    matrix: RatingMatrix, positive_threshold: int | None = None
) -> dict[str, int]:
    """Positive ratings per item; by default only the maximum rating counts."""
    threshold = matrix.k if positive_threshold is None else positive_threshold
    counts: dict[str, int] = {}
    for (_, item_id), rating in matrix.entries.items():
        if rating >= threshold:
            counts[item_id] = counts.get(item_id, 0) + 1
    return counts


def popularity_recommend(
    target_matrix: RatingMatrix,
    n: int,
    positive_threshold: int | None = None,
    items: Sequence[str] | None = None,
) -> list[str]:
    """Most positively rated items first; lexical order breaks count ties."""
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")
    counts = positive_counts(target_matrix, positive_threshold)
    universe = sorted(set(items)) if items is not None else sorted(target_matrix.items())
    ranked = sorted(universe, key=lambda item: (-counts.get(item, 0), item))
    return ranked[:n]


def pearson(a: Sequence[float], b: Sequence[float]) -> float:
    """Pearson correlation; 0.0 for fewer than two points or zero variance."""
    if len(a) != len(b):
        raise ValidationError(f"length mismatch: {len(a)} vs {len(b)}")
    count = len(a)
    if count < 2:
        return 0.0
    sum_a, sum_b = sum(a), sum(b)
    sum_aa = sum(x * x for x in a)
    sum_bb = sum(y * y for y in b)
    sum_ab = sum(x * y for x, y in zip(a, b))
    var_a = count * sum_aa - sum_a * sum_a
    var_b = count * sum_bb - sum_b * sum_b
    if var_a <= 0.0 or var_b <= 0.0:
        return 0.0
    return (count * sum_ab - sum_a * sum_b) / math.sqrt(var_a * var_b)


def knn_cross_domain_recommend(
    active_user: str,
    k_neighbors: int,
    source_matrix: RatingMatrix,
    target_matrix: RatingMatrix,
    n: int,
    positive_threshold: int | None = None,
    items: Sequence[str] | None = None,
) -> list[str]:
    """KNN ranking: neighbors correlate in the source, predictions average the target.

    Neighbors are the top-K users by Pearson correlation over source co-rated
    items, restricted to users with at least one target rating.  Predicted
    ratings are similarity-weighted means over positive-similarity neighbors;
    items no neighbor rated fall back to popularity order below every
    predicted item.
    """
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")
    if k_neighbors < 1:
        raise ConfigError(f"k_neighbors must be >= 1, got {k_neighbors}")
    active_ratings = source_matrix.ratings_of_user(active_user)
    if not active_ratings:
        raise ColdStartError(f"user {active_user!r} has no source-domain ratings")

    similarities: list[tuple[float, str]] = []
    for candidate in sorted(target_matrix.users()):
        if candidate == active_user:
            continue
        candidate_ratings = source_matrix.ratings_of_user(candidate)
        shared = sorted(set(active_ratings) & set(candidate_ratings))
        if len(shared) < 2:
            continue
        similarity = pearson(
            [float(active_ratings[item]) for item in shared],
            [float(candidate_ratings[item]) for item in shared],
        )
        similarities.append((similarity, candidate))
    similarities.sort(key=lambda pair: (-pair[0], pair[1]))
    neighbors = [(s, u) for s, u in similarities[:k_neighbors] if s > 0.0]

    weighted: dict[str, float] = {}
    weights: dict[str, float] = {}
    for similarity, neighbor in neighbors:
        for item_id, rating in target_matrix.ratings_of_user(neighbor).items():
            weighted[item_id] = weighted.get(item_id, 0.0) + similarity * rating
            weights[item_id] = weights.get(item_id, 0.0) + similarity
    predictions = {item: weighted[item] / weights[item] for item in weighted}

    universe = sorted(set(items)) if items is not None else sorted(target_matrix.items())
    predicted = sorted(
        (item for item in universe if item in predictions),
        key=lambda item: (-predictions[item], item),
    )
    fallback = popularity_recommend(
        target_matrix,
        max(n, 1),
        positive_threshold,
        items=[item for item in universe if item not in predictions],
    ) if len(predicted) < n and len(universe) > len(predicted) else []
    ranked = predicted + fallback
    return ranked[:n]


RECOMMENDATIONS_HEADER = ("user_id", "position", "item_id", "score")


def export_recommendations(
    per_user: dict[str, list[Recommendation]], path: str
) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(RECOMMENDATIONS_HEADER)
        for user_id in sorted(per_user):
            for rec in per_user[user_id]:
                writer.writerow(
                    [user_id, rec.position, rec.item_id, f"{rec.score:.6f}"]
                )

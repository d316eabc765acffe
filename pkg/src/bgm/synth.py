"""Synthetic two-domain dataset with planted, recoverable cluster structure.

Users belong to latent clusters.  Each cluster owns a contiguous block of
items in both domains, and a user's target-domain cluster equals their source
cluster with probability ``cross_domain_correlation``.  Content vectors sit
around per-cluster centroids, so items from one block look alike and blocks
look different.

Rating semantics are cluster-keyed: every block has a characteristic liked
rating, users rate their own block at that level, spread dislikes (rating 1)
over random items outside their block, and a ``noise_rate`` share of ratings
is uniformly random.  Keying the liked level to the block means the rating
value itself carries which block a user favors, so a method that models
rating values jointly with content can transfer preferences across domains,
while a per-item positive count cannot tell one user from another.  The liked
levels occupy the top half of the scale (k = 2 * clusters + 1, block c is
liked at clusters + 2 + c): every block's liked level must sit above the
scale midpoint, or ranking by expected rating would steer users of low-keyed
blocks toward other blocks.  Dislikes are deliberately diffuse: concentrating
them would make disliked items look like a preference pattern of their own.

Everything is drawn from one seeded generator in a fixed order: the same
config yields byte-identical exports.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import ContentCatalog, RatingMatrix
from .errors import ConfigError


@dataclass(frozen=True)
class SynthConfig:
    users: int
    source_items: int
    target_items: int
    clusters: int
    intra_cluster_rating_probability: float = 0.6
    cross_domain_correlation: float = 0.9
    noise_rate: float = 0.1
    source_ratings_per_user: int = 40
    target_ratings_per_user: int = 40
    source_feature_dim: int | None = None
    target_feature_dim: int | None = None
    feature_noise: float = 0.15
    seed: int = 0

    def __post_init__(self) -> None:
        if self.users < 1:
            raise ConfigError(f"users must be >= 1, got {self.users}")
        if self.clusters < 2:
            raise ConfigError(f"clusters must be >= 2, got {self.clusters}")
        if self.source_items < self.clusters or self.target_items < self.clusters:
            raise ConfigError(
                "each domain needs at least one item per cluster, got "
                f"{self.source_items}/{self.target_items} items for {self.clusters} clusters"
            )
        for name in (
            "intra_cluster_rating_probability",
            "cross_domain_correlation",
            "noise_rate",
        ):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name} must be in [0, 1], got {value}")
        if self.source_ratings_per_user < 1 or self.target_ratings_per_user < 1:
            raise ConfigError("ratings per user must be >= 1")
        if self.source_ratings_per_user > self.source_items:
            raise ConfigError("source_ratings_per_user exceeds source_items")
        if self.target_ratings_per_user > self.target_items:
            raise ConfigError("target_ratings_per_user exceeds target_items")
        if self.feature_noise < 0.0:
            raise ConfigError(f"feature_noise must be >= 0, got {self.feature_noise}")
        for name in ("source_feature_dim", "target_feature_dim"):
            value = getattr(self, name)
            if value is not None and value < 1:
                raise ConfigError(f"{name} must be >= 1, got {value}")

    @property
    def rating_scale(self) -> int:
        return 2 * self.clusters + 1

    def liked_rating(self, cluster: int) -> int:
        # Liked levels fill the top half of the scale; rating 1 always means a pan.
        return self.clusters + 2 + cluster


@dataclass(frozen=True)
class SyntheticDataset:
    source_ratings: RatingMatrix
    target_ratings: RatingMatrix
    source_content: ContentCatalog
    target_content: ContentCatalog
    user_source_cluster: dict[str, int]
    user_target_cluster: dict[str, int]
    source_item_cluster: dict[str, int]
    target_item_cluster: dict[str, int]

    def preferred_target_items(self, user_id: str) -> frozenset[str]:
        """The planted preference set: the user's target-cluster block."""
        cluster = self.user_target_cluster[user_id]
        return frozenset(
            item for item, c in self.target_item_cluster.items() if c == cluster
        )


def _item_ids(prefix: str, count: int) -> list[str]:
    width = len(str(count))
    return [f"{prefix}{index:0{width}d}" for index in range(count)]


def _make_content(
    rng: np.random.Generator,
    item_ids: list[str],
    item_cluster: dict[str, int],
    dim: int,
    noise: float,
    domain_id: str,
) -> ContentCatalog:
    features = {}
    for item_id in item_ids:
        centroid = np.zeros(dim)
        centroid[item_cluster[item_id] % dim] = 1.0
        vector = centroid + rng.normal(0.0, noise, dim)
        features[item_id] = tuple(float(v) for v in vector)
    return ContentCatalog(
        domain_id=domain_id,
        feature_names=tuple(f"f{i + 1}" for i in range(dim)),
        features=features,
    )


def _sample_user_ratings(
    rng: np.random.Generator,
    config: SynthConfig,
    cluster: int,
    items_by_cluster: list[list[str]],
    all_items: list[str],
    per_user: int,
) -> dict[str, int]:
    own = items_by_cluster[cluster]
    other = [item for item in all_items if item not in set(own)]
    structured = 1.0 - config.noise_rate
    n_own = int(round(per_user * structured * config.intra_cluster_rating_probability))
    n_pan = int(
        round(per_user * structured * (1.0 - config.intra_cluster_rating_probability))
    )
    n_own = min(n_own, len(own))
    n_pan = min(n_pan, len(other))
    n_noise = max(per_user - n_own - n_pan, 0)

    ratings: dict[str, int] = {}
    for item in rng.choice(own, size=n_own, replace=False):
        ratings[str(item)] = config.liked_rating(cluster)
    for item in rng.choice(other, size=n_pan, replace=False):
        ratings[str(item)] = 1
    if n_noise:
        noise_items = rng.choice(all_items, size=min(n_noise, len(all_items)), replace=False)
        noise_values = rng.integers(1, config.rating_scale + 1, size=len(noise_items))
        for item, value in zip(noise_items, noise_values):
            ratings.setdefault(str(item), int(value))
    return ratings


def generate_synthetic(config: SynthConfig) -> SyntheticDataset:
    """Generate the two rating matrices and content catalogs for one seed."""
    rng = np.random.default_rng(config.seed)
    k = config.rating_scale

    user_width = len(str(config.users))
    user_ids = [f"u{index:0{user_width}d}" for index in range(config.users)]
    source_items = _item_ids("s", config.source_items)
    target_items = _item_ids("t", config.target_items)
    source_item_cluster = {
        item: index % config.clusters for index, item in enumerate(source_items)
    }
    target_item_cluster = {
        item: index % config.clusters for index, item in enumerate(target_items)
    }
    source_blocks = [
        [item for item in source_items if source_item_cluster[item] == c]
        for c in range(config.clusters)
    ]
    target_blocks = [
        [item for item in target_items if target_item_cluster[item] == c]
        for c in range(config.clusters)
    ]

    source_dim = config.source_feature_dim or config.clusters
    target_dim = config.target_feature_dim or config.clusters
    source_content = _make_content(
        rng, source_items, source_item_cluster, source_dim, config.feature_noise, "source"
    )
    target_content = _make_content(
        rng, target_items, target_item_cluster, target_dim, config.feature_noise, "target"
    )

    user_source_cluster: dict[str, int] = {}
    user_target_cluster: dict[str, int] = {}
    source_entries: dict[tuple[str, str], int] = {}
    target_entries: dict[tuple[str, str], int] = {}
    for index, user_id in enumerate(user_ids):
        cluster = index % config.clusters
        user_source_cluster[user_id] = cluster
        if rng.random() < config.cross_domain_correlation:
            target_cluster = cluster
        else:
            others = [c for c in range(config.clusters) if c != cluster]
            target_cluster = int(rng.choice(others))
        user_target_cluster[user_id] = target_cluster

        for item, rating in _sample_user_ratings(
            rng, config, cluster, source_blocks, source_items,
            config.source_ratings_per_user,
        ).items():
            source_entries[(user_id, item)] = rating
        for item, rating in _sample_user_ratings(
            rng, config, target_cluster, target_blocks, target_items,
            config.target_ratings_per_user,
        ).items():
            target_entries[(user_id, item)] = rating

    return SyntheticDataset(
        source_ratings=RatingMatrix(domain_id="source", k=k, entries=source_entries),
        target_ratings=RatingMatrix(domain_id="target", k=k, entries=target_entries),
        source_content=source_content,
        target_content=target_content,
        user_source_cluster=user_source_cluster,
        user_target_cluster=user_target_cluster,
        source_item_cluster=source_item_cluster,
        target_item_cluster=target_item_cluster,
    )

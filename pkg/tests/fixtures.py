"""Hand-checked example data shared across the test suite.

EXAMPLE_RATINGS is a small ten-user, five-item matrix on a 1..3 scale whose
behavior graphs, trees, and edge weights were worked out by hand.  Several
tests freeze those hand results as oracles, so treat any edit here as an
oracle change, not a cosmetic one.
"""

from bgm.dataset import RatingMatrix

EXAMPLE_K = 3

EXAMPLE_RATINGS = {
    ("user1", "item1"): 2,
    ("user1", "item4"): 1,
    ("user1", "item5"): 1,
    ("user2", "item1"): 1,
    ("user2", "item3"): 1,
    ("user2", "item4"): 1,
    ("user2", "item5"): 3,
    ("user3", "item1"): 2,
    ("user3", "item2"): 1,
    ("user3", "item3"): 2,
    ("user3", "item4"): 3,
    ("user4", "item1"): 3,
    ("user4", "item3"): 2,
    ("user4", "item5"): 1,
    ("user5", "item2"): 3,
    ("user5", "item3"): 3,
    ("user5", "item4"): 1,
    ("user5", "item5"): 1,
    ("user6", "item1"): 1,
    ("user6", "item2"): 3,
    ("user6", "item4"): 1,
    ("user7", "item1"): 1,
    ("user7", "item3"): 1,
    ("user7", "item4"): 2,
    ("user7", "item5"): 3,
    ("user8", "item1"): 2,
    ("user8", "item2"): 3,
    ("user8", "item3"): 3,
    ("user8", "item4"): 2,
    ("user8", "item5"): 1,
    ("user9", "item1"): 1,
    ("user9", "item2"): 3,
    ("user9", "item4"): 1,
    ("user10", "item1"): 1,
    ("user10", "item3"): 1,
    ("user10", "item5"): 3,
}

# Every (item, rating) node of the example with its exact user set.
EXAMPLE_NODES = {
    ("item1", 1): {"user2", "user6", "user7", "user9", "user10"},
    ("item1", 2): {"user1", "user3", "user8"},
    ("item1", 3): {"user4"},
    ("item2", 1): {"user3"},
    ("item2", 3): {"user5", "user6", "user8", "user9"},
    ("item3", 1): {"user2", "user7", "user10"},
    ("item3", 2): {"user3", "user4"},
    ("item3", 3): {"user5", "user8"},
    ("item4", 1): {"user1", "user2", "user5", "user6", "user9"},
    ("item4", 2): {"user7", "user8"},
    ("item4", 3): {"user3"},
    ("item5", 1): {"user1", "user4", "user5", "user8"},
    ("item5", 3): {"user2", "user7", "user10"},
}

# All edges at threshold 0.5, as {frozenset of node keys: weight}.
EXAMPLE_EDGES_AT_HALF = {
    frozenset({("item1", 1), ("item3", 1)}): 0.6,
    frozenset({("item1", 1), ("item5", 3)}): 0.6,
    frozenset({("item3", 1), ("item5", 3)}): 1.0,
    frozenset({("item2", 3), ("item4", 1)}): 0.5,
    frozenset({("item2", 3), ("item3", 3)}): 0.5,
    frozenset({("item3", 3), ("item5", 1)}): 0.5,
    frozenset({("item1", 3), ("item3", 2)}): 0.5,
    frozenset({("item2", 1), ("item3", 2)}): 0.5,
    frozenset({("item2", 1), ("item4", 3)}): 1.0,
    frozenset({("item3", 2), ("item4", 3)}): 0.5,
}

# Connected components at threshold 0.5, in canonical component order
# (strongest node first; singletons interleave by the same order).
EXAMPLE_COMPONENTS_AT_HALF = [
    {("item1", 1), ("item3", 1), ("item5", 3)},
    {("item2", 3), ("item4", 1), ("item3", 3), ("item5", 1)},
    {("item1", 2)},
    {("item1", 3), ("item3", 2), ("item2", 1), ("item4", 3)},
    {("item4", 2)},
]


def example_matrix(domain_id: str = "source") -> RatingMatrix:
    return RatingMatrix(domain_id=domain_id, k=EXAMPLE_K, entries=dict(EXAMPLE_RATINGS))


def example_ratings_csv(path) -> None:
    """Write the example as a loadable ratings CSV."""
    lines = ["user_id,item_id,rating"]
    for (user, item), rating in sorted(EXAMPLE_RATINGS.items()):
        lines.append(f"{user},{item},{rating}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def mirrored_target_csv(path, item_map=None) -> None:
    """Write a target-domain copy of the example with renamed items.

    Same users, same values: the target behavior graphs mirror the source
    ones exactly, which makes downstream matching output easy to predict.
    """
    item_map = item_map or {f"item{i}": f"titem{i}" for i in range(1, 6)}
    lines = ["user_id,item_id,rating"]
    for (user, item), rating in sorted(
        ((u, item_map[i]), r) for (u, i), r in EXAMPLE_RATINGS.items()
    ):
        lines.append(f"{user},{item},{rating}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def content_csv(path, item_ids, dim: int = 2) -> None:
    """Deterministic small content vectors for the given items."""
    header = "item_id," + ",".join(f"f{i + 1}" for i in range(dim))
    lines = [header]
    for index, item in enumerate(sorted(item_ids)):
        vector = [round(0.1 * ((index + j) % 7), 1) for j in range(dim)]
        lines.append(item + "," + ",".join(repr(v) for v in vector))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")

"""Pairing trees across domains and matching their nodes into bridges.

Tree similarity is the Jaccard overlap of the user sets covered by two trees.
Within a matched pair, nodes are matched depth by depth: candidates at the
same depth compete greedily on user-set similarity, and nodes left unmatched
at one depth carry down to compete at the next.  A bridge records one matched
(source node, target node) pair; artificial roots are aligned implicitly but
never emitted.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

from .dataset import jaccard
from .errors import ParseError, ValidationError
from .graphs import NodeKey, RatedItemNode
from .trees import BehaviorTree


@dataclass(frozen=True)
class TreePair:
    source: BehaviorTree
    target: BehaviorTree
    similarity: float


@dataclass(frozen=True)
class Bridge:
    source_node: RatedItemNode
    target_node: RatedItemNode
    similarity: float


def tree_similarity(source: BehaviorTree, target: BehaviorTree) -> float:
    return jaccard(source.user_union(), target.user_union())


def pair_trees(
    source_trees: list[BehaviorTree],
    target_trees: list[BehaviorTree],
    unique_tree_pairing: bool = False,
) -> list[TreePair]:
    """Assign each source tree the most user-similar target tree.

    Ties prefer the target tree with more nodes, then the smaller tree id.
    Pairs with zero similarity are dropped.  Several source trees may share a
    target unless unique_tree_pairing is set, in which case pairs are accepted
    greedily by descending similarity with each target used at most once.
    """
    if not source_trees or not target_trees:
        raise ValidationError("tree pairing requires at least one tree per domain")
    source_users = {t.tree_id: t.user_union() for t in source_trees}
    target_users = {t.tree_id: t.user_union() for t in target_trees}

    def sim(s: BehaviorTree, t: BehaviorTree) -> float:
        return jaccard(source_users[s.tree_id], target_users[t.tree_id])

    ordered_sources = sorted(source_trees, key=lambda t: t.tree_id)
    if not unique_tree_pairing:
        pairs = []
        for source in ordered_sources:
            best = min(
                target_trees,
                key=lambda t: (-sim(source, t), -t.node_count(), t.tree_id),
            )
            best_sim = sim(source, best)
            if best_sim > 0.0:
                pairs.append(TreePair(source=source, target=best, similarity=best_sim))
        return pairs

    candidates = [
        (sim(s, t), s, t)
        for s in ordered_sources
        for t in target_trees
    ]
    candidates.sort(
        key=lambda c: (-c[0], c[1].tree_id, -c[2].node_count(), c[2].tree_id)
    )
    used_sources: set[int] = set()
    used_targets: set[int] = set()
    chosen: dict[int, TreePair] = {}
    for similarity, source, target in candidates:
        if similarity <= 0.0:
            break
        if source.tree_id in used_sources or target.tree_id in used_targets:
            continue
        used_sources.add(source.tree_id)
        used_targets.add(target.tree_id)
        chosen[source.tree_id] = TreePair(source=source, target=target, similarity=similarity)
    return [chosen[tree_id] for tree_id in sorted(chosen)]


def match_nodes(pair: TreePair) -> list[Bridge]:
    """Match nodes of a paired tree, one-to-one, depth-aligned and greedy.

    At each depth the candidate pairs are scored by user-set Jaccard and
    accepted in descending score; ties prefer the higher combined popularity
    and then the lexically smaller node keys.  Zero-score pairs are never
    accepted, and unmatched nodes drop down one level to try again.
    Returned bridges are sorted by descending similarity.
    """
    bridges: list[Bridge] = []
    carry_source: list[RatedItemNode] = []
    carry_target: list[RatedItemNode] = []
    max_depth = max(pair.source.max_depth(), pair.target.max_depth())
    for depth in range(1, max_depth + 1):
        pool_source = carry_source + pair.source.nodes_at_depth(depth)
        pool_target = carry_target + pair.target.nodes_at_depth(depth)
        scored = []
        for s in pool_source:
            for t in pool_target:
                score = jaccard(s.users, t.users)
                if score > 0.0:
                    scored.append((score, s, t))
        scored.sort(
            key=lambda c: (
                -c[0],
                -(c[1].popularity + c[2].popularity),
                c[1].key,
                c[2].key,
            )
        )
        matched_source: set[NodeKey] = set()
        matched_target: set[NodeKey] = set()
        for score, s, t in scored:
            if s.key in matched_source or t.key in matched_target:
                continue
            matched_source.add(s.key)
            matched_target.add(t.key)
            bridges.append(Bridge(source_node=s, target_node=t, similarity=score))
        carry_source = [s for s in pool_source if s.key not in matched_source]
        carry_target = [t for t in pool_target if t.key not in matched_target]
    bridges.sort(key=lambda b: (-b.similarity, b.source_node.key, b.target_node.key))
    return bridges


def match_forests(
    source_trees: list[BehaviorTree],
    target_trees: list[BehaviorTree],
    unique_tree_pairing: bool = False,
) -> list[Bridge]:
    """All bridges across the forests, grouped by source tree id."""
    bridges: list[Bridge] = []
    for pair in pair_trees(source_trees, target_trees, unique_tree_pairing):
        bridges.extend(match_nodes(pair))
    return bridges


BRIDGES_HEADER = ("src_item", "src_rating", "tgt_item", "tgt_rating", "similarity")


def export_bridges(bridges: list[Bridge], path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(BRIDGES_HEADER)
        for bridge in bridges:
            writer.writerow(
                [
                    bridge.source_node.item_id,
                    bridge.source_node.rating,
                    bridge.target_node.item_id,
                    bridge.target_node.rating,
                    f"{bridge.similarity:.6f}",
                ]
            )


def load_bridge_rows(path: str) -> list[tuple[str, int, str, int]]:
    """Read (src_item, src_rating, tgt_item, tgt_rating) rows from an export."""
    rows: list[tuple[str, int, str, int]] = []
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != list(BRIDGES_HEADER):
            raise ParseError(f"{path}: line 1: expected header {','.join(BRIDGES_HEADER)}")
        for line_number, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                rows.append((row[0], int(row[1]), row[2], int(row[3])))
            except (ValueError, IndexError):
                raise ParseError(f"{path}: line {line_number}: bad row {row!r}") from None
    return rows

"""Behavior trees: each behavior graph arranged under an artificial root.

Nodes more popular than the graph average become children of the root; the
rest attach greedily, in descending popularity, to the already-attached
neighbor with the strongest edge.  Ties prefer the more popular parent and
then the lexically smaller one, so construction is fully deterministic.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Mapping

from .errors import ParseError, StructuralError, ValidationError
from .graphs import BehaviorForest, BehaviorGraph, NodeKey, RatedItemNode, node_sort_key

ROOT_ITEM = "__ROOT__"
ROOT_KEY: NodeKey = (ROOT_ITEM, 0)


@dataclass(frozen=True)
class BehaviorTree:
    tree_id: int
    graph: BehaviorGraph
    parents: Mapping[NodeKey, NodeKey]          # child key -> parent key (or ROOT_KEY)
    children: Mapping[NodeKey, tuple[NodeKey, ...]]
    edge_weights: Mapping[NodeKey, float]       # child key -> weight of its parent edge
    depths: Mapping[NodeKey, int]               # node key -> depth, root children at 1

    def node(self, key: NodeKey) -> RatedItemNode:
        return self.graph.node_map()[key]

    def node_count(self) -> int:
        return len(self.parents)

    def max_depth(self) -> int:
        return max(self.depths.values(), default=0)

    def nodes_at_depth(self, depth: int) -> list[RatedItemNode]:
        node_map = self.graph.node_map()
        keys = [key for key, d in self.depths.items() if d == depth]
        return sorted((node_map[k] for k in keys), key=node_sort_key)

    def user_union(self) -> frozenset[str]:
        return self.graph.user_union()


def build_tree(graph: BehaviorGraph, tree_id: int) -> BehaviorTree:
    """Arrange one behavior graph as a tree under the artificial root.

    Raises StructuralError when the graph is not connected, since a
    disconnected graph cannot attach every node.
    """
    if not graph.nodes:
        raise ValidationError("cannot build a tree from an empty graph")
    adjacency = graph.adjacency()
    node_map = graph.node_map()
    mean_pop = graph.mean_popularity()
    popular = [n for n in graph.nodes if n.popularity > mean_pop]
    if not popular:
        # All popularities equal: promote the single lexically smallest node.
        popular = [min(graph.nodes, key=node_sort_key)]
    popular.sort(key=node_sort_key)

    parents: dict[NodeKey, NodeKey] = {}
    edge_weights: dict[NodeKey, float] = {}
    depths: dict[NodeKey, int] = {}
    for node in popular:
        parents[node.key] = ROOT_KEY
        edge_weights[node.key] = 0.0
        depths[node.key] = 1

    remaining = [n for n in graph.nodes if n.key not in parents]
    remaining.sort(key=node_sort_key)
    while remaining:
        deferred: list[RatedItemNode] = []
        attached_any = False
        for node in remaining:
            candidates = [
                (weight, node_map[nb_key])
                for nb_key, weight in adjacency[node.key].items()
                if nb_key in parents
            ]
            if not candidates:
                deferred.append(node)
                continue
            # Strongest edge wins; ties go to the more popular, then smaller, parent.
            weight, parent = min(
                candidates,
                key=lambda c: (-c[0], node_sort_key(c[1])),
            )
            parents[node.key] = parent.key
            edge_weights[node.key] = weight
            depths[node.key] = depths[parent.key] + 1
            attached_any = True
        if not attached_any:
            raise StructuralError(
                f"graph {graph.component_id} is not connected: "
                f"{len(deferred)} nodes cannot attach"
            )
        remaining = deferred

    children: dict[NodeKey, list[NodeKey]] = {ROOT_KEY: []}
    for node in graph.nodes:
        children.setdefault(node.key, [])
    for child_key in sorted(parents, key=lambda k: node_sort_key(node_map[k])):
        children[parents[child_key]].append(child_key)
    return BehaviorTree(
        tree_id=tree_id,
        graph=graph,
        parents=parents,
        children={k: tuple(v) for k, v in children.items()},
        edge_weights=edge_weights,
        depths=depths,
    )


def build_trees(forest: BehaviorForest) -> list[BehaviorTree]:
    """One tree per behavior graph, keeping the component id as the tree id."""
    return [build_tree(graph, graph.component_id) for graph in forest.graphs]


TREES_HEADER = (
    "tree_id",
    "child_item",
    "child_rating",
    "parent_item",
    "parent_rating",
    "edge_weight",
)


def export_trees(trees: list[BehaviorTree], path: str) -> None:
    """One row per non-root node; the artificial root appears only as a parent."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(TREES_HEADER)
        for tree in trees:
            node_map = tree.graph.node_map()
            for child_key in sorted(tree.parents, key=lambda k: node_sort_key(node_map[k])):
                parent_key = tree.parents[child_key]
                writer.writerow(
                    [
                        tree.tree_id,
                        child_key[0],
                        child_key[1],
                        parent_key[0],
                        parent_key[1],
                        f"{tree.edge_weights[child_key]:.6f}",
                    ]
                )


def load_trees(path: str, forest: BehaviorForest) -> list[BehaviorTree]:
    """Rebuild trees from an export, resolving nodes against the given forest.

    Edge weights are recomputed from the forest so the six-decimal rounding in
    the file never propagates.
    """
    graph_by_id = {graph.component_id: graph for graph in forest.graphs}
    rows_by_tree: dict[int, list[tuple[NodeKey, NodeKey]]] = {}
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != list(TREES_HEADER):
            raise ParseError(f"{path}: line 1: expected header {','.join(TREES_HEADER)}")
        for line_number, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                tree_id = int(row[0])
                child = (row[1], int(row[2]))
                parent = (row[3], int(row[4]))
            except (ValueError, IndexError):
                raise ParseError(f"{path}: line {line_number}: bad row {row!r}") from None
            rows_by_tree.setdefault(tree_id, []).append((child, parent))

    trees = []
    for tree_id in sorted(rows_by_tree):
        if tree_id not in graph_by_id:
            raise ValidationError(f"{path}: tree {tree_id} has no matching behavior graph")
        graph = graph_by_id[tree_id]
        node_map = graph.node_map()
        adjacency = graph.adjacency()
        parents: dict[NodeKey, NodeKey] = {}
        edge_weights: dict[NodeKey, float] = {}
        for child, parent in rows_by_tree[tree_id]:
            if child not in node_map:
                raise ValidationError(f"{path}: tree {tree_id}: unknown node {child!r}")
            if parent != ROOT_KEY and parent not in node_map:
                raise ValidationError(f"{path}: tree {tree_id}: unknown parent {parent!r}")
            parents[child] = parent
            edge_weights[child] = (
                0.0 if parent == ROOT_KEY else adjacency[child][parent]
            )
        if set(parents) != set(node_map):
            raise ValidationError(
                f"{path}: tree {tree_id} does not cover its graph's nodes"
            )
        depths: dict[NodeKey, int] = {}

        def depth_of(key: NodeKey) -> int:
            if key == ROOT_KEY:
                return 0
            if key not in depths:
                depths[key] = depth_of(parents[key]) + 1
            return depths[key]

        for child in parents:
            depth_of(child)
        children: dict[NodeKey, list[NodeKey]] = {ROOT_KEY: []}
        for key in node_map:
            children.setdefault(key, [])
        for child in sorted(parents, key=lambda k: node_sort_key(node_map[k])):
            children[parents[child]].append(child)
        trees.append(
            BehaviorTree(
                tree_id=tree_id,
                graph=graph,
                parents=parents,
                children={k: tuple(v) for k, v in children.items()},
                edge_weights=edge_weights,
                depths=depths,
            )
        )
    return trees

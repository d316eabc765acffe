"""Behavior graphs: items expanded per rating value, linked by user overlap.

Each (item, rating) pair with at least one user becomes a node whose user set
drives everything downstream.  Two nodes are connected when the Jaccard
similarity of their user sets clears the threshold and the intersection is
nonempty, and the connected components of that graph form the behavior forest.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .dataset import RatingMatrix, jaccard
from .errors import ConfigError, ParseError, ValidationError

NodeKey = tuple[str, int]


@dataclass(frozen=True)
class RatedItemNode:
    """One (item, rating) pair together with the users who rated it that way."""

    item_id: str
    rating: int
    users: frozenset[str]

    @property
    def popularity(self) -> int:
        return len(self.users)

    @property
    def key(self) -> NodeKey:
        return (self.item_id, self.rating)


def node_sort_key(node: RatedItemNode) -> tuple[int, str, int]:
    # Canonical order: popularity descending, then (item_id, rating) ascending.
    return (-node.popularity, node.item_id, node.rating)


@dataclass(frozen=True)
class GraphEdge:
    a: RatedItemNode
    b: RatedItemNode
    weight: float


@dataclass(frozen=True)
class BehaviorGraph:
    """One connected component of the thresholded node graph."""

    component_id: int
    nodes: tuple[RatedItemNode, ...]
    edges: tuple[GraphEdge, ...]

    def node_map(self) -> dict[NodeKey, RatedItemNode]:
        return {node.key: node for node in self.nodes}

    def adjacency(self) -> dict[NodeKey, dict[NodeKey, float]]:
        adj: dict[NodeKey, dict[NodeKey, float]] = {node.key: {} for node in self.nodes}
        for edge in self.edges:
            adj[edge.a.key][edge.b.key] = edge.weight
            adj[edge.b.key][edge.a.key] = edge.weight
        return adj

    def mean_popularity(self) -> float:
        return sum(node.popularity for node in self.nodes) / len(self.nodes)

    def user_union(self) -> frozenset[str]:
        users: set[str] = set()
        for node in self.nodes:
            users |= node.users
        return frozenset(users)


@dataclass(frozen=True)
class BehaviorForest:
    domain_id: str
    threshold: float
    graphs: tuple[BehaviorGraph, ...]

    def node_users(self) -> dict[NodeKey, frozenset[str]]:
        return {n.key: n.users for g in self.graphs for n in g.nodes}


def expand_items(matrix: RatingMatrix) -> list[RatedItemNode]:
    """Expand a rating matrix into nodes, dropping (item, rating) pairs nobody used.

    The result is sorted by popularity descending with (item_id, rating)
    breaking ties, so downstream passes see a stable order.
    """
    groups: dict[NodeKey, set[str]] = {}
    for (user_id, item_id), rating in matrix.entries.items():
        groups.setdefault((item_id, rating), set()).add(user_id)
    nodes = [
        RatedItemNode(item_id=item_id, rating=rating, users=frozenset(users))
        for (item_id, rating), users in groups.items()
    ]
    nodes.sort(key=node_sort_key)
    return nodes


def _intersection_counts(nodes: list[RatedItemNode]) -> sparse.coo_matrix:
    """Pairwise user-intersection sizes via a sparse user-by-node incidence Gram."""
    user_index: dict[str, int] = {}
    rows: list[int] = []
    cols: list[int] = []
    for col, node in enumerate(nodes):
        for user in node.users:
            rows.append(user_index.setdefault(user, len(user_index)))
            cols.append(col)
    incidence = sparse.csr_matrix(
        (np.ones(len(rows), dtype=np.int64), (rows, cols)),
        shape=(len(user_index), len(nodes)),
    )
    return (incidence.T @ incidence).tocoo()


def build_forest(
    nodes: list[RatedItemNode],
    threshold: float,
    domain_id: str = "domain",
    drop_singletons: bool = False,
) -> BehaviorForest:
    """Group nodes into behavior graphs under the given edge threshold.

    An edge requires jaccard(users_a, users_b) >= threshold AND a nonempty
    intersection, so a threshold of 0 still never links disjoint nodes.
    Components and the nodes and edges inside them come out in a canonical
    order (max popularity first, lexical tie-break), independent of input
    order.
    """
    if not 0.0 <= threshold <= 1.0:
        raise ConfigError(f"threshold must be in [0, 1], got {threshold}")
    ordered = sorted(nodes, key=node_sort_key)
    seen: set[NodeKey] = set()
    for node in ordered:
        if node.popularity < 1:
            raise ValidationError(f"node {node.key!r} has no users")
        if node.key in seen:
            raise ValidationError(f"duplicate node {node.key!r}")
        seen.add(node.key)

    # Union-find over nodes; edges collected per normalized index pair.
    parent = list(range(len(ordered)))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x: int, y: int) -> None:
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[ry] = rx

    edge_list: list[tuple[int, int, float]] = []
    if ordered:
        counts = _intersection_counts(ordered)
        pops = np.array([node.popularity for node in ordered], dtype=np.int64)
        mask = counts.row < counts.col
        rows, cols, inter = counts.row[mask], counts.col[mask], counts.data[mask]
        unions = pops[rows] + pops[cols] - inter
        weights = inter / unions
        keep = (weights >= threshold) & (inter > 0)
        for i, j, w in zip(rows[keep], cols[keep], weights[keep]):
            edge_list.append((int(i), int(j), float(w)))
            union(int(i), int(j))

    components: dict[int, list[int]] = {}
    for idx in range(len(ordered)):
        components.setdefault(find(idx), []).append(idx)
    edges_by_root: dict[int, list[tuple[int, int, float]]] = {}
    for i, j, w in edge_list:
        edges_by_root.setdefault(find(i), []).append((i, j, w))

    graphs: list[BehaviorGraph] = []
    # Component order: strongest (max-popularity) component first, lexical ties.
    comp_items = sorted(
        components.items(),
        key=lambda kv: min(node_sort_key(ordered[i]) for i in kv[1]),
    )
    component_id = 0
    for root, indices in comp_items:
        if drop_singletons and len(indices) == 1:
            continue
        comp_nodes = tuple(ordered[i] for i in sorted(indices))
        comp_edges = []
        for i, j, w in edges_by_root.get(root, []):
            a, b = ordered[i], ordered[j]
            if node_sort_key(b) < node_sort_key(a):
                a, b = b, a
            comp_edges.append(GraphEdge(a=a, b=b, weight=w))
        comp_edges.sort(key=lambda e: (node_sort_key(e.a), node_sort_key(e.b)))
        graphs.append(
            BehaviorGraph(component_id=component_id, nodes=comp_nodes, edges=tuple(comp_edges))
        )
        component_id += 1
    return BehaviorForest(domain_id=domain_id, threshold=threshold, graphs=tuple(graphs))


def build_forest_from_matrix(
    matrix: RatingMatrix, threshold: float, drop_singletons: bool = False
) -> BehaviorForest:
    return build_forest(
        expand_items(matrix), threshold, domain_id=matrix.domain_id,
        drop_singletons=drop_singletons,
    )


NODES_HEADER = ("component_id", "item_id", "rating", "popularity")
EDGES_HEADER = ("component_id", "item_a", "rating_a", "item_b", "rating_b", "weight")


def export_forest(forest: BehaviorForest, nodes_path: str, edges_path: str) -> None:
    """Write one node CSV and one edge CSV; weights carry six decimal places."""
    with open(nodes_path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(NODES_HEADER)
        for graph in forest.graphs:
            for node in graph.nodes:
                writer.writerow(
                    [graph.component_id, node.item_id, node.rating, node.popularity]
                )
    with open(edges_path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(EDGES_HEADER)
        for graph in forest.graphs:
            for edge in graph.edges:
                writer.writerow(
                    [
                        graph.component_id,
                        edge.a.item_id,
                        edge.a.rating,
                        edge.b.item_id,
                        edge.b.rating,
                        f"{edge.weight:.6f}",
                    ]
                )


def load_forest(
    nodes_path: str,
    edges_path: str,
    node_users: dict[NodeKey, frozenset[str]],
    domain_id: str = "domain",
    threshold: float = 0.0,
) -> BehaviorForest:
    """Rebuild a forest from exported CSVs plus user sets recovered from ratings.

    The edge CSV stores weights rounded to six decimals; exact weights are
    recomputed from the user sets so downstream arithmetic stays bit-stable.
    """
    comp_nodes: dict[int, list[RatedItemNode]] = {}
    with open(nodes_path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != list(NODES_HEADER):
            raise ParseError(f"{nodes_path}: line 1: expected header "
                             f"{','.join(NODES_HEADER)}")
        for line_number, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                comp, item_id, rating = int(row[0]), row[1], int(row[2])
            except (ValueError, IndexError):
                raise ParseError(f"{nodes_path}: line {line_number}: bad row {row!r}") from None
            key = (item_id, rating)
            if key not in node_users:
                raise ValidationError(
                    f"{nodes_path}: line {line_number}: node {key!r} not present "
                    f"in the ratings data"
                )
            comp_nodes.setdefault(comp, []).append(
                RatedItemNode(item_id=item_id, rating=rating, users=node_users[key])
            )
    comp_edges: dict[int, list[tuple[NodeKey, NodeKey]]] = {}
    with open(edges_path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != list(EDGES_HEADER):
            raise ParseError(f"{edges_path}: line 1: expected header "
                             f"{','.join(EDGES_HEADER)}")
        for line_number, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                comp = int(row[0])
                key_a = (row[1], int(row[2]))
                key_b = (row[3], int(row[4]))
            except (ValueError, IndexError):
                raise ParseError(f"{edges_path}: line {line_number}: bad row {row!r}") from None
            comp_edges.setdefault(comp, []).append((key_a, key_b))

    graphs = []
    for comp in sorted(comp_nodes):
        nodes = tuple(sorted(comp_nodes[comp], key=node_sort_key))
        node_map = {node.key: node for node in nodes}
        edges = []
        for key_a, key_b in comp_edges.get(comp, []):
            a, b = node_map[key_a], node_map[key_b]
            edges.append(GraphEdge(a=a, b=b, weight=jaccard(a.users, b.users)))
        edges.sort(key=lambda e: (node_sort_key(e.a), node_sort_key(e.b)))
        graphs.append(BehaviorGraph(component_id=comp, nodes=nodes, edges=tuple(edges)))
    return BehaviorForest(domain_id=domain_id, threshold=threshold, graphs=tuple(graphs))

import itertools
import random
import time

import pytest

from bgm.dataset import RatingMatrix, jaccard
from bgm.errors import ValidationError
from bgm.graphs import BehaviorGraph, RatedItemNode, build_forest_from_matrix
from bgm.matching import (
    Bridge,
    TreePair,
    export_bridges,
    load_bridge_rows,
    match_forests,
    match_nodes,
    pair_trees,
    tree_similarity,
)
from bgm.trees import ROOT_KEY, BehaviorTree, build_trees


def make_tree(tree_id, levels):
    """Assemble a tree directly from (item, rating, users) rows per depth."""
    nodes, parents, depths, weights = [], {}, {}, {}
    previous = [ROOT_KEY]
    for depth, level in enumerate(levels, start=1):
        current = []
        for item, rating, users in level:
            node = RatedItemNode(item, rating, frozenset(users))
            nodes.append(node)
            parents[node.key] = previous[0]
            weights[node.key] = 0.0 if previous[0] == ROOT_KEY else 0.5
            depths[node.key] = depth
            current.append(node.key)
        previous = current or previous
    children = {ROOT_KEY: []}
    for node in nodes:
        children.setdefault(node.key, [])
    for child, parent in parents.items():
        children[parent].append(child)
    graph = BehaviorGraph(component_id=tree_id, nodes=tuple(nodes), edges=())
    return BehaviorTree(
        tree_id=tree_id,
        graph=graph,
        parents=parents,
        children={key: tuple(value) for key, value in children.items()},
        edge_weights=weights,
        depths=depths,
    )


def star(tree_id, rows):
    return make_tree(tree_id, [rows])


def test_tree_similarity_is_user_union_jaccard():
    s = make_tree(0, [[("a", 1, {"u1", "u2"})], [("b", 2, {"u3"})]])
    t = star(1, [("x", 1, {"u2", "u3", "u4"})])
    assert tree_similarity(s, t) == 2 / 4


def test_pairing_picks_identical_over_disjoint_target():
    source = star(0, [("s", 1, {"u1", "u2"})])
    same = star(0, [("x", 1, {"u1", "u2"})])
    disjoint = star(1, [("y", 1, {"u3"})])
    pairs = pair_trees([source], [same, disjoint])
    assert len(pairs) == 1
    assert pairs[0].target is same
    assert pairs[0].similarity == 1.0


def test_pairing_maximizes_user_jaccard():
    source = star(0, [("s", 1, {"u1", "u2", "u3"})])
    a = star(0, [("a", 1, {"u2", "u3", "u4"})])
    b = star(1, [("b", 1, {"u3", "u4", "u5"})])
    pairs = pair_trees([source], [b, a])
    assert pairs[0].target is a
    assert pairs[0].similarity == 0.5  # b scores 1/5


def test_pairing_drops_zero_similarity_sources():
    source = star(0, [("s", 1, {"u1"})])
    target = star(0, [("t", 1, {"u9"})])
    assert pair_trees([source], [target]) == []


def test_pairing_tie_prefers_larger_target_then_smaller_id():
    source = star(0, [("s", 1, {"u1", "u2"})])
    small = star(0, [("a", 1, {"u1", "u2"})])
    big = make_tree(1, [[("b", 1, {"u1", "u2"}), ("c", 2, {"u1"})]])
    # both targets have user union {u1, u2}: similarity ties at 1.0
    assert pair_trees([source], [small, big])[0].target is big

    twin_a = star(3, [("d", 1, {"u1", "u2"})])
    twin_b = star(5, [("e", 1, {"u1", "u2"})])
    assert pair_trees([source], [twin_b, twin_a])[0].target is twin_a


def test_many_sources_may_share_a_target_unless_unique():
    s0 = star(0, [("s0", 1, {"u1", "u2"})])
    s1 = star(1, [("s1", 1, {"u1", "u2", "u3"})])
    target = star(0, [("t", 1, {"u1", "u2"})])

    shared = pair_trees([s0, s1], [target])
    assert [(p.source.tree_id, p.target.tree_id) for p in shared] == [(0, 0), (1, 0)]

    unique = pair_trees([s0, s1], [target], unique_tree_pairing=True)
    assert [(p.source.tree_id, p.target.tree_id) for p in unique] == [(0, 0)]
    assert unique[0].similarity == 1.0


def test_unique_pairing_assigns_each_target_once_in_similarity_order():
    s0 = star(0, [("s0", 1, {"u1", "u2"})])
    s1 = star(1, [("s1", 1, {"u1", "u2", "u3", "u4"})])
    t0 = star(0, [("t0", 1, {"u1", "u2"})])
    t1 = star(1, [("t1", 1, {"u1", "u2", "u3"})])
    pairs = pair_trees([s0, s1], [t0, t1], unique_tree_pairing=True)
    got = [(p.source.tree_id, p.target.tree_id, p.similarity) for p in pairs]
    assert got == [(0, 0, 1.0), (1, 1, 3 / 4)]


def test_pairing_requires_nonempty_forests():
    tree = star(0, [("s", 1, {"u1"})])
    with pytest.raises(ValidationError):
        pair_trees([], [tree])
    with pytest.raises(ValidationError):
        pair_trees([tree], [])


def test_single_node_identity_match():
    s = star(0, [("s", 2, {"u1", "u2"})])
    t = star(0, [("t", 3, {"u1", "u2"})])
    bridges = match_nodes(TreePair(s, t, 1.0))
    assert len(bridges) == 1
    assert bridges[0].source_node.key == ("s", 2)
    assert bridges[0].target_node.key == ("t", 3)
    assert bridges[0].similarity == 1.0


def test_two_node_greedy_match_is_optimal_here():
    s = make_tree(0, [[("s1", 1, {"u1", "u2"}), ("s2", 1, {"u3"})]])
    t = make_tree(1, [[("t1", 1, {"u1", "u2"}), ("t2", 1, {"u3", "u4"})]])
    bridges = match_nodes(TreePair(s, t, 1.0))
    got = [(b.source_node.item_id, b.target_node.item_id, b.similarity) for b in bridges]
    assert got == [("s1", "t1", 1.0), ("s2", "t2", 0.5)]


def test_disjoint_user_sets_produce_no_bridges():
    s = star(0, [("s", 1, {"u1"})])
    t = star(0, [("t", 1, {"u2"})])
    assert match_nodes(TreePair(s, t, 0.0)) == []


def test_score_tie_prefers_higher_combined_popularity_over_lexical():
    s = star(0, [("s", 1, {"u1", "u2"})])
    # both targets score 1/3 against s; the more popular one has the
    # lexically larger item id, so popularity must be what decides
    t = make_tree(
        1,
        [[
            ("a", 1, {"u1", "u3"}),
            ("z", 1, {"u1", "u2", "u3", "u4", "u5", "u6"}),
        ]],
    )
    bridges = match_nodes(TreePair(s, t, 1.0))
    assert [b.target_node.item_id for b in bridges] == ["z"]


def test_unmatched_nodes_carry_down_to_the_next_depth():
    s = make_tree(0, [[("s1", 1, {"u1"})], [("s2", 1, {"u2", "u3"})]])
    t = make_tree(1, [[("t1", 1, {"u2"})], [("t2", 1, {"u1", "u5"})]])
    bridges = match_nodes(TreePair(s, t, 1.0))
    got = {(b.source_node.item_id, b.target_node.item_id): b.similarity for b in bridges}
    # depth 1 scores zero, so both depth-1 nodes drop down and cross-match
    assert got == {("s1", "t2"): 0.5, ("s2", "t1"): 0.5}


def test_match_forests_groups_by_source_tree_then_descending_similarity():
    s0 = make_tree(0, [[("a", 1, {"u1", "u2"}), ("b", 1, {"u3"})]])
    s1 = star(1, [("c", 1, {"u4"})])
    t0 = make_tree(
        10, [[("x", 1, {"u1", "u2"}), ("y", 1, {"u3", "u4", "u5"})]]
    )
    bridges = match_forests([s0, s1], [t0])
    got = [(b.source_node.item_id, b.target_node.item_id, b.similarity) for b in bridges]
    assert got == [
        ("a", "x", 1.0),
        ("b", "y", 1 / 3),
        ("c", "y", 1 / 3),
    ]


def random_matrix(rng, users=16, items=8, k=3, density=0.4, prefix="i"):
    entries = {}
    for u in range(users):
        for i in range(items):
            if rng.random() < density:
                entries[(f"u{u}", f"{prefix}{i}")] = rng.randint(1, k)
    return RatingMatrix(domain_id="d", k=k, entries=entries)


def test_matching_invariants_on_random_forests():
    rng = random.Random(29)
    for _ in range(15):
        source = build_trees(build_forest_from_matrix(random_matrix(rng), 0.25))
        target = build_trees(
            build_forest_from_matrix(random_matrix(rng, prefix="j"), 0.25)
        )
        for pair in pair_trees(source, target):
            bridges = match_nodes(pair)
            seen_source, seen_target = set(), set()
            for bridge in bridges:
                assert bridge.source_node.item_id != "__ROOT__"
                assert bridge.target_node.item_id != "__ROOT__"
                assert bridge.source_node.key not in seen_source
                assert bridge.target_node.key not in seen_target
                seen_source.add(bridge.source_node.key)
                seen_target.add(bridge.target_node.key)
                assert 0.0 < bridge.similarity <= 1.0
                assert bridge.similarity == jaccard(
                    bridge.source_node.users, bridge.target_node.users
                )


def brute_force_best_total(snodes, tnodes):
    if len(snodes) > len(tnodes):
        snodes, tnodes = tnodes, snodes
    best = 0.0
    for perm in itertools.permutations(tnodes, len(snodes)):
        best = max(
            best, sum(jaccard(a.users, b.users) for a, b in zip(snodes, perm))
        )
    return best


def hierarchical_levels(rng, prefix, pool):
    depth_one = rng.randint(1, 3)
    depth_two = rng.randint(1, 4)
    levels = [[], []]
    for i in range(depth_one):
        size = rng.randint(max(3, len(pool) // 2), len(pool))
        levels[0].append((f"{prefix}a{i}", rng.randint(1, 3), frozenset(rng.sample(pool, size))))
    for i in range(depth_two):
        size = rng.randint(1, max(2, len(pool) // 3))
        levels[1].append((f"{prefix}b{i}", rng.randint(1, 3), frozenset(rng.sample(pool, size))))
    return levels


def jittered_copy(rng, levels, pool, prefix):
    out = []
    for depth, level in enumerate(levels):
        row = []
        for index, (_, rating, users) in enumerate(level):
            users = set(users)
            for user in sorted(users):
                if rng.random() < 0.15:
                    users.discard(user)
            for user in pool:
                if rng.random() < 0.1:
                    users.add(user)
            if not users:
                users = {rng.choice(pool)}
            row.append((f"{prefix}{'ab'[depth]}{index}", rating, frozenset(users)))
        out.append(row)
    return out


def test_greedy_total_stays_within_ninety_percent_of_optimum():
    """Regression bound on correlated tree pairs with <= 6 nodes per depth."""
    rng = random.Random(2024)
    pool = [f"u{i}" for i in range(12)]
    checked = 0
    for _ in range(200):
        source_levels = hierarchical_levels(rng, "s", pool)
        target_levels = jittered_copy(rng, source_levels, pool, "t")
        s = make_tree(0, source_levels)
        t = make_tree(1, target_levels)
        greedy = sum(b.similarity for b in match_nodes(TreePair(s, t, 1.0)))
        best = brute_force_best_total(list(s.graph.nodes), list(t.graph.nodes))
        if best > 0:
            checked += 1
            assert greedy >= 0.9 * best
    assert checked >= 150


def test_bridges_export_then_load_round_trip(tmp_path):
    s = make_tree(0, [[("s1", 2, {"u1", "u2"}), ("s2", 1, {"u3"})]])
    t = make_tree(1, [[("t1", 3, {"u1", "u2"}), ("t2", 2, {"u3", "u4"})]])
    bridges = match_nodes(TreePair(s, t, 1.0))
    path = tmp_path / "bridges.csv"
    export_bridges(bridges, str(path))

    lines = path.read_text().splitlines()
    assert lines[0] == "src_item,src_rating,tgt_item,tgt_rating,similarity"
    assert lines[1] == "s1,2,t1,3,1.000000"
    assert load_bridge_rows(str(path)) == [
        ("s1", 2, "t1", 3),
        ("s2", 1, "t2", 2),
    ]

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from absalign import SubgraphSelector, build_dag
from absalign.errors import (
    CycleDetected,
    DuplicateNode,
    EmptySelection,
    UnknownLevel,
    UnknownNode,
)

from oracles import (
    brute_force_ancestors,
    brute_force_descendants,
    brute_force_levels,
    random_dag,
)


class TestBuild:
    def test_cifar_shape(self, cifar_dag):
        assert len(cifar_dag) == 121
        assert cifar_dag.levels == (1, 2, 3)
        assert len(cifar_dag.nodes_at_level(1)) == 100
        assert len(cifar_dag.nodes_at_level(2)) == 20
        assert cifar_dag.nodes_at_level(3) == ["root"]
        assert len(cifar_dag.edges()) == 120

    def test_single_node(self):
        dag = build_dag([("only", "only")], [])
        assert dag.roots == ("only",)
        assert dag.leaves == ("only",)
        assert dag.level_of("only") == 1

    def test_two_cycle(self):
        with pytest.raises(CycleDetected) as err:
            build_dag([("a", "a"), ("b", "b")], [("a", "b"), ("b", "a")])
        assert "a" in str(err.value) and "b" in str(err.value)

    def test_self_loop(self):
        with pytest.raises(CycleDetected):
            build_dag([("a", "a")], [("a", "a")])

    def test_longer_cycle_named(self):
        nodes = [(n, n) for n in "abcd"]
        with pytest.raises(CycleDetected) as err:
            build_dag(nodes, [("a", "b"), ("b", "c"), ("c", "a"), ("d", "a")])
        cycle = err.value.cycle
        assert len(cycle) >= 3
        assert cycle[0] == cycle[-1]

    def test_duplicate_node(self):
        with pytest.raises(DuplicateNode):
            build_dag([("a", "a"), ("a", "again")], [])

    def test_unknown_edge_endpoint(self):
        with pytest.raises(UnknownNode):
            build_dag([("a", "a")], [("a", "ghost")])

    def test_duplicate_edges_tolerated(self):
        dag = build_dag([("a", "a"), ("b", "b")], [("a", "b"), ("a", "b")])
        assert dag.parents("a") == ("b",)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            build_dag([], [])

    def test_multiple_roots_allowed(self):
        dag = build_dag(
            [("x", "x"), ("y", "y"), ("p", "p"), ("q", "q")],
            [("x", "p"), ("y", "q")],
        )
        assert dag.roots == ("p", "q")


class TestLevels:
    def test_cifar_levels(self, cifar_dag):
        assert cifar_dag.level_of("maple") == 1
        assert cifar_dag.level_of("tree") == 2
        assert cifar_dag.level_of("root") == 3

    def test_diamond_top_level(self, diamond_dag):
        assert diamond_dag.level_of("x") == 1
        assert diamond_dag.level_of("m1") == 2
        assert diamond_dag.level_of("m2") == 2
        assert diamond_dag.level_of("t") == 3

    def test_unknown_node(self, cifar_dag):
        with pytest.raises(UnknownNode):
            cifar_dag.level_of("mapel")

    def test_level_skipping_edge(self):
        # top is 1 hop from leaf2 even though mid sits between it and leaf1
        dag = build_dag(
            [("leaf1", ""), ("leaf2", ""), ("mid", ""), ("top", "")],
            [("leaf1", "mid"), ("mid", "top"), ("leaf2", "top")],
        )
        assert dag.level_of("mid") == 2
        assert dag.level_of("top") == 2

    def test_nodes_at_unknown_level(self, cifar_dag):
        with pytest.raises(UnknownLevel):
            cifar_dag.nodes_at_level(4)


class TestClosures:
    def test_flower_descendants(self, cifar_dag):
        assert cifar_dag.descendants("flower") == {
            "orchid", "poppy", "rose", "sunflower", "tulip"
        }

    def test_root_ancestors_empty(self, cifar_dag):
        assert cifar_dag.ancestors("root") == frozenset()

    def test_diamond_ancestors_deduplicated(self, diamond_dag):
        assert diamond_dag.ancestors("x") == {"m1", "m2", "t"}

    def test_relatives_direction(self, cifar_dag):
        assert cifar_dag.relatives("maple", "ancestors") == {"tree", "root"}
        assert cifar_dag.relatives("tree", "descendants") == {
            "maple", "oak", "palm", "pine", "willow"
        }
        with pytest.raises(ValueError):
            cifar_dag.relatives("maple", "sideways")


class TestAncestorAtLevel:
    def test_maple_superclass(self, cifar_dag):
        assert cifar_dag.ancestor_at_level("maple", 2) == {"tree"}

    def test_identity(self, cifar_dag):
        assert cifar_dag.ancestor_at_level("tree", 2) == {"tree"}

    def test_diamond_multiparent(self, diamond_dag):
        assert diamond_dag.ancestor_at_level("x", 2) == {"m1", "m2"}

    def test_unknown_level(self, cifar_dag):
        with pytest.raises(UnknownLevel):
            cifar_dag.ancestor_at_level("maple", 9)

    def test_skipped_level_is_empty(self):
        dag = build_dag(
            [("leaf1", ""), ("leaf2", ""), ("mid", ""), ("top", "")],
            [("leaf1", "mid"), ("mid", "top"), ("leaf2", "top")],
        )
        # leaf2's only ancestor sits at level 2; nothing of its lineage at level 1 but itself
        assert dag.ancestor_at_level("leaf2", 2) == {"top"}
        assert dag.ancestor_at_level("leaf2", 1) == {"leaf2"}


class TestSelectors:
    def test_with_descendants(self, cifar_dag):
        got = cifar_dag.resolve_selector(SubgraphSelector("with-descendants", anchor="flower"))
        assert got == {"flower", "orchid", "poppy", "rose", "sunflower", "tulip"}

    def test_ancestors_only_on_root_is_empty(self, cifar_dag):
        with pytest.raises(EmptySelection):
            cifar_dag.resolve_selector(SubgraphSelector("ancestors-only", anchor="root"))

    def test_level_slice(self, cifar_dag):
        got = cifar_dag.resolve_selector(SubgraphSelector("level-slice", level=2))
        assert len(got) == 20
        assert "tree" in got and "people" in got

    def test_all_nodes(self, cifar_dag):
        got = cifar_dag.resolve_selector(SubgraphSelector("all-nodes"))
        assert len(got) == len(cifar_dag)

    def test_updown(self, cifar_dag):
        got = cifar_dag.resolve_selector(
            SubgraphSelector("ancestors-and-descendants-and-self", anchor="tree")
        )
        assert got == {"tree", "root", "maple", "oak", "palm", "pine", "willow"}

    def test_single(self, cifar_dag):
        got = cifar_dag.resolve_selector(SubgraphSelector("single", anchor="maple"))
        assert got == {"maple"}

    def test_unknown_anchor(self, cifar_dag):
        with pytest.raises(UnknownNode):
            cifar_dag.resolve_selector(SubgraphSelector("single", anchor="nope"))

    def test_missing_anchor_rejected(self, cifar_dag):
        with pytest.raises(ValueError):
            cifar_dag.resolve_selector(SubgraphSelector("single"))

    def test_from_text_round_trip(self):
        for text in ("node:maple", "down:tree", "up:maple", "updown:tree", "level:2", "all"):
            sel = SubgraphSelector.from_text(text)
            assert sel.describe() == text
        with pytest.raises(ValueError):
            SubgraphSelector.from_text("sideways:x")


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10**9))
def test_levels_match_independent_search(seed):
    rng = random.Random(seed)
    node_ids, edges = random_dag(rng, max_nodes=50)
    dag = build_dag([(n, n) for n in node_ids], edges)
    expected = brute_force_levels(node_ids, edges)
    for node in node_ids:
        assert dag.level_of(node) == expected[node]


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10**9))
def test_closures_mutually_consistent(seed):
    rng = random.Random(seed)
    node_ids, edges = random_dag(rng, max_nodes=30)
    dag = build_dag([(n, n) for n in node_ids], edges)
    for node in node_ids:
        assert dag.descendants(node) == brute_force_descendants(node_ids, edges, node)
        assert dag.ancestors(node) == brute_force_ancestors(node_ids, edges, node)
        for descendant in dag.descendants(node):
            assert node in dag.ancestors(descendant)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**9))
def test_selector_results_are_subsets(seed):
    rng = random.Random(seed)
    node_ids, edges = random_dag(rng, max_nodes=30)
    dag = build_dag([(n, n) for n in node_ids], edges)
    universe = set(dag.nodes())
    anchor = rng.choice(node_ids)
    for sel in (
        SubgraphSelector("single", anchor=anchor),
        SubgraphSelector("with-descendants", anchor=anchor),
        SubgraphSelector("ancestors-and-descendants-and-self", anchor=anchor),
        SubgraphSelector("all-nodes"),
        SubgraphSelector("level-slice", level=dag.level_of(anchor)),
    ):
        assert dag.resolve_selector(sel) <= universe


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**9))
def test_serialized_round_trip(seed):
    rng = random.Random(seed)
    node_ids, edges = random_dag(rng, max_nodes=30)
    dag = build_dag([(n, n) for n in node_ids], edges)
    desc = dag.to_dict()
    rebuilt = build_dag(
        [(entry["id"], entry["name"]) for entry in desc["nodes"]],
        [(entry["id"], parent) for entry in desc["nodes"] for parent in entry["parents"]],
    )
    assert rebuilt.to_dict() == desc

import io
import random

import pytest

from absalign import filter_instances, parse_query, propagate
from absalign import read_weighted_jsonl, write_weighted_jsonl
from absalign.errors import QuerySyntaxError, UnknownLevel, UnknownNode

from conftest import sparse_record


class TestParse:
    def test_contained_confusion_pattern(self, cifar_dag):
        query = parse_query("count(level=2, min_mass=0.1) == 1", cifar_dag)
        assert query.describe() == "count(level=2, min_mass=0.1) == 1"

    def test_spread_pattern(self, cifar_dag):
        parse_query("count(level=2, min_mass=0.1) > 3", cifar_dag)

    def test_split_pattern(self, cifar_dag):
        query = parse_query("split(vehicles_1, vehicles_2, tol=0.05)", cifar_dag)
        assert query.predicates[0].min_mass == 0.1

    def test_conjunction(self, cifar_dag):
        query = parse_query(
            "count(level=2, min_mass=0.1) == 1 && top(level=2) == tree", cifar_dag
        )
        assert len(query.predicates) == 2

    def test_mass_and_entropy(self, cifar_dag):
        parse_query("mass(tree) >= 0.5", cifar_dag)
        parse_query("entropy(level=1) < 0.25", cifar_dag)

    def test_unknown_node(self, cifar_dag):
        with pytest.raises(UnknownNode):
            parse_query("mass(treeeee) > 0.5", cifar_dag)

    def test_unknown_level(self, cifar_dag):
        with pytest.raises(UnknownLevel):
            parse_query("count(level=9, min_mass=0.1) > 1", cifar_dag)

    def test_syntax_error_positions(self, cifar_dag):
        with pytest.raises(QuerySyntaxError) as err:
            parse_query("count(level=2 min_mass=0.1) > 1", cifar_dag)
        assert err.value.position == 14
        with pytest.raises(QuerySyntaxError) as err:
            parse_query("mass(tree) >", cifar_dag)
        assert err.value.position == len("mass(tree) >")

    def test_unknown_predicate(self, cifar_dag):
        with pytest.raises(QuerySyntaxError):
            parse_query("blend(tree) > 0.5", cifar_dag)

    def test_top_rejects_other_comparators(self, cifar_dag):
        with pytest.raises(QuerySyntaxError):
            parse_query("top(level=2) >= tree", cifar_dag)

    def test_trailing_garbage(self, cifar_dag):
        with pytest.raises(QuerySyntaxError):
            parse_query("mass(tree) > 0.5 tree", cifar_dag)

    def test_unexpected_character(self, cifar_dag):
        with pytest.raises(QuerySyntaxError):
            parse_query("mass(tree) > 0.5 && !", cifar_dag)

    def test_split_min_mass_override(self, cifar_dag):
        query = parse_query("split(tree, flower, tol=0.1)", cifar_dag, split_min_mass=0.2)
        assert query.predicates[0].min_mass == 0.2


class TestEvaluate:
    def test_one_hot_contained(self, cifar_dag):
        wd = propagate(cifar_dag, sparse_record("img", {"maple": 1.0}))
        query = parse_query("count(level=2, min_mass=0.1) == 1", cifar_dag)
        assert query.evaluate(wd, cifar_dag) is True

    def test_four_leaf_split_false(self, four_leaf_dag, four_leaf_wd):
        query = parse_query("split(A, B, tol=0.05)", four_leaf_dag)
        assert query.evaluate(four_leaf_wd, four_leaf_dag) is False

    def test_four_leaf_top(self, four_leaf_dag, four_leaf_wd):
        assert parse_query("top(level=2) == A", four_leaf_dag).evaluate(
            four_leaf_wd, four_leaf_dag
        )
        assert not parse_query("top(level=2) == B", four_leaf_dag).evaluate(
            four_leaf_wd, four_leaf_dag
        )

    def test_split_true_case(self, four_leaf_dag):
        wd = propagate(four_leaf_dag, sparse_record("even", {"a1": 0.48, "b1": 0.52}))
        query = parse_query("split(A, B, tol=0.05)", four_leaf_dag)
        assert query.evaluate(wd, four_leaf_dag) is True

    def test_split_needs_min_mass(self, four_leaf_dag):
        wd = propagate(four_leaf_dag, sparse_record("tiny", {"a1": 0.05, "b1": 0.05}))
        query = parse_query("split(A, B, tol=0.05)", four_leaf_dag)
        assert query.evaluate(wd, four_leaf_dag) is False

    def test_split_related_nodes_never_match(self, four_leaf_dag):
        wd = propagate(four_leaf_dag, sparse_record("x", {"a1": 0.5}))
        query = parse_query("split(a1, A, tol=1.0)", four_leaf_dag)
        # a1's mass propagates to A making them equal, but they are lineage-related
        assert query.evaluate(wd, four_leaf_dag) is False

    def test_mass_thresholds(self, four_leaf_dag, four_leaf_wd):
        assert parse_query("mass(A) >= 0.7", four_leaf_dag).evaluate(
            four_leaf_wd, four_leaf_dag
        )
        assert not parse_query("mass(A) > 0.7", four_leaf_dag).evaluate(
            four_leaf_wd, four_leaf_dag
        )

    def test_entropy_predicate(self, four_leaf_dag, four_leaf_wd):
        assert parse_query("entropy(level=2) < 0.9", four_leaf_dag).evaluate(
            four_leaf_wd, four_leaf_dag
        )

    def test_conjunction_is_and(self, four_leaf_dag, four_leaf_wd):
        query = parse_query("top(level=2) == A && mass(B) > 0.5", four_leaf_dag)
        assert query.evaluate(four_leaf_wd, four_leaf_dag) is False


class TestFilter:
    def test_no_matches(self, four_leaf_dag, four_leaf_wd):
        query = parse_query("mass(B) > 0.9", four_leaf_dag)
        ids, fraction = filter_instances(query, [four_leaf_wd], four_leaf_dag)
        assert ids == []
        assert fraction == 0.0

    def test_trivial_query_matches_everything(self, four_leaf_dag):
        wds = [
            propagate(four_leaf_dag, sparse_record(f"i{i}", {"a1": 0.5}))
            for i in range(5)
        ]
        query = parse_query("count(level=1, min_mass=0.0) >= 1", four_leaf_dag)
        ids, fraction = filter_instances(query, wds, four_leaf_dag)
        assert fraction == 1.0
        assert len(ids) == 5

    def test_constructed_split_fraction(self, cifar_dag):
        wds = []
        for i in range(5):  # split pattern between the two vehicle branches
            values = {"bicycle": 0.5, "rocket": 0.5}
            wds.append(propagate(cifar_dag, sparse_record(f"split-{i}", values)))
        for i in range(15):  # concentrated elsewhere
            wds.append(propagate(cifar_dag, sparse_record(f"calm-{i}", {"maple": 1.0})))
        query = parse_query("split(vehicles_1, vehicles_2, tol=0.05)", cifar_dag)
        ids, fraction = filter_instances(query, wds, cifar_dag)
        assert fraction == 0.25
        assert all(i.startswith("split-") for i in ids)

    def test_order_invariant_and_ids_sorted(self, cifar_dag):
        wds = [
            propagate(cifar_dag, sparse_record(f"img-{i:02d}", {"maple": 1.0}))
            for i in range(10)
        ]
        query = parse_query("count(level=2, min_mass=0.1) == 1", cifar_dag)
        ids_a, frac_a = filter_instances(query, wds, cifar_dag)
        shuffled = list(wds)
        random.Random(4).shuffle(shuffled)
        ids_b, frac_b = filter_instances(query, shuffled, cifar_dag)
        assert ids_a == ids_b == sorted(ids_b)
        assert frac_a == frac_b

    def test_stable_through_reserialization(self, cifar_dag):
        wds = [
            propagate(cifar_dag, sparse_record(f"img-{i}", {"maple": 0.6, "oak": 0.4}))
            for i in range(4)
        ]
        buffer = io.StringIO()
        write_weighted_jsonl(wds, buffer)
        buffer.seek(0)
        reloaded = read_weighted_jsonl(buffer)
        query = parse_query("count(level=2, min_mass=0.1) == 1 && top(level=2) == tree",
                            cifar_dag)
        assert filter_instances(query, wds, cifar_dag) == filter_instances(
            query, reloaded, cifar_dag
        )

"""Alignment metrics computed over collections of weighted DAGs.

All four metrics reduce per-instance contributions, so they are invariant to
instance order and can be grouped by concept:

* accuracy alignment: the fraction of prediction errors at one level that are
  resolved by predicting at a higher level.
* uncertainty alignment: the mean drop in level-wise Shannon entropy between
  two levels (reported as a positive reduction; the raw signed difference
  rides along).
* subgraph preference: how often the maximum (aggregated) mass in one node
  set strictly exceeds the maximum in another.
* concept confusion: dataset-normalized pairwise entropy of two nodes'
  aggregates; high scores mark concepts treated as jointly plausible.

Argmax ties always resolve to the lexicographically smallest node id, so
results are independent of iteration order. "Undefined" is an explicit report
state, never a silent zero.
"""

import csv
import io
import json
import math
from collections import defaultdict
from dataclasses import dataclass, field

from .errors import (
    EmptyCollection,
    MissingTruth,
    SamePairNode,
    UnknownNode,
)

PAIR_MODES = ("raw", "normalized")
VALUE_KINDS = ("value", "aggregate")


def _log_fn(base):
    if base in (2, "2"):
        return math.log2
    if base in ("e", math.e):
        return math.log
    raise ValueError(f"entropy base must be 2 or 'e', not {base!r}")


def _base_label(base):
    return "e" if base in ("e", math.e) else "2"


@dataclass
class LevelDistribution:
    """Aggregated values over the ordered nodes of one level."""

    level: int
    nodes: list
    values: list
    total: float

    @classmethod
    def from_weighted(cls, wd, dag, level):
        nodes = dag.nodes_at_level(level)
        values = [wd.aggregates.get(n, 0.0) for n in nodes]
        return cls(level=level, nodes=nodes, values=values, total=sum(values))

    def entropy(self, base=2):
        """Shannon entropy of the normalized values; 0 for an empty level."""
        if self.total <= 0:
            return 0.0
        log = _log_fn(base)
        acc = 0.0
        for v in self.values:
            if v > 0:
                p = v / self.total
                acc -= p * log(p)
        return acc

    def top_node(self):
        """Argmax node id; ties go to the smallest id (nodes are presorted)."""
        best, best_value = self.nodes[0], self.values[0]
        for node, value in zip(self.nodes, self.values):
            if value > best_value:
                best, best_value = node, value
        return best


def level_entropy(wd, dag, level, base=2):
    """Entropy of one instance's aggregate mass across a level."""
    return LevelDistribution.from_weighted(wd, dag, level).entropy(base)


def top_node_at_level(wd, dag, level):
    return LevelDistribution.from_weighted(wd, dag, level).top_node()


@dataclass
class MetricReport:
    """A metric value plus the bookkeeping needed to trust it."""

    metric: str
    params: dict
    value: float | None
    support: dict
    flags: dict = field(default_factory=dict)
    groups: dict | None = None
    pairs: list | None = None
    extra: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def to_json_dict(self):
        out = {
            "metric": self.metric,
            "params": self.params,
            "value": self.value,
            "support": self.support,
            "flags": self.flags,
        }
        if self.groups is not None:
            out["groups"] = self.groups
        if self.pairs is not None:
            out["pairs"] = self.pairs
        if self.extra:
            out.update(self.extra)
        if self.notes:
            out["notes"] = self.notes
        return out

    def to_json(self):
        return json.dumps(self.to_json_dict(), sort_keys=True, ensure_ascii=False, indent=2)

    def to_csv(self):
        """Rows: one overall, one per group, one per pair.

        Columns: metric, params, group, value, support, flags.
        """
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["metric", "params", "group", "value", "support", "flags"])
        params = json.dumps(self.params, sort_keys=True, ensure_ascii=False)

        def fmt(value):
            return "" if value is None else repr(value)

        writer.writerow([
            self.metric, params, "", fmt(self.value),
            json.dumps(self.support, sort_keys=True),
            json.dumps(self.flags, sort_keys=True),
        ])
        for group_id in sorted(self.groups or {}):
            entry = self.groups[group_id]
            writer.writerow([
                self.metric, params, group_id, fmt(entry.get("value")),
                json.dumps(entry.get("support", {}), sort_keys=True),
                json.dumps(entry.get("flags", {}), sort_keys=True),
            ])
        for entry in self.pairs or []:
            writer.writerow([
                self.metric, params, "|".join(entry["pair"]), fmt(entry.get("value")),
                json.dumps({"co_support": entry.get("co_support", 0)}, sort_keys=True),
                "{}",
            ])
        return buf.getvalue()


# --------------------------------------------------------------- uncertainty

def uncertainty_alignment(wds, dag, from_level, to_level, base=2):
    """Mean entropy reduction between two levels, higher = mass collapses upward.

    The headline value is mean[H(from) - H(to)]; the signed difference
    mean[H(to) - H(from)] is carried in ``signed_difference``.
    """
    if from_level >= to_level:
        raise ValueError("from_level must be strictly below to_level")
    dag.nodes_at_level(from_level)
    dag.nodes_at_level(to_level)
    # fsum keeps the mean exactly independent of instance order
    contributions = [
        level_entropy(wd, dag, from_level, base) - level_entropy(wd, dag, to_level, base)
        for wd in wds
    ]
    count = len(contributions)
    if count == 0:
        raise EmptyCollection()
    reduction = math.fsum(contributions) / count
    return MetricReport(
        metric="uncertainty-alignment",
        params={"from_level": from_level, "to_level": to_level, "base": _base_label(base)},
        value=reduction,
        support={"instances": count},
        extra={"signed_difference": -reduction},
    )


# ------------------------------------------------------------------ accuracy

def accuracy_alignment(wds, dag, truths, from_level, to_level):
    """Fraction of from-level errors resolved by predicting at to_level.

    An instance is correct at a level when the argmax aggregate node at that
    level is an ancestor (or the node itself) of its truth label. With zero
    errors at the from level the ratio has no value and the report says so
    explicitly. Aggregation can flip an argmax, so the value may be negative;
    it is flagged, not clamped.
    """
    if from_level >= to_level:
        raise ValueError("from_level must be strictly below to_level")
    dag.nodes_at_level(from_level)
    dag.nodes_at_level(to_level)
    n = 0
    correct_from = 0
    correct_to = 0
    expected_cache = {}
    for wd in wds:
        truth = truths.get(wd.instance_id)
        if truth is None:
            raise MissingTruth(wd.instance_id)
        key = (truth, from_level)
        if key not in expected_cache:
            expected_cache[key] = dag.ancestor_at_level(truth, from_level)
            expected_cache[(truth, to_level)] = dag.ancestor_at_level(truth, to_level)
        if top_node_at_level(wd, dag, from_level) in expected_cache[(truth, from_level)]:
            correct_from += 1
        if top_node_at_level(wd, dag, to_level) in expected_cache[(truth, to_level)]:
            correct_to += 1
        n += 1
    errors_from = n - correct_from
    undefined = errors_from == 0
    value = None if undefined else (correct_to - correct_from) / errors_from
    return MetricReport(
        metric="accuracy-alignment",
        params={"from_level": from_level, "to_level": to_level},
        value=value,
        support={
            "instances": n,
            "correct_at_from": correct_from,
            "correct_at_to": correct_to,
            "errors_at_from": errors_from,
        },
        flags={
            "undefined": undefined,
            "negative": bool(value is not None and value < 0),
        },
        notes=(["no errors at the from level; ratio undefined"] if undefined else []),
    )


def top1_accuracy(wds, dag, truths, level=None):
    """Plain argmax accuracy at a level (defaults to the leaf level)."""
    level = dag.levels[0] if level is None else level
    n = 0
    correct = 0
    for wd in wds:
        truth = truths.get(wd.instance_id)
        if truth is None:
            raise MissingTruth(wd.instance_id)
        if top_node_at_level(wd, dag, level) in dag.ancestor_at_level(truth, level):
            correct += 1
        n += 1
    if n == 0:
        raise EmptyCollection()
    return correct / n


# ---------------------------------------------------------------- preference

def subgraph_preference(wds, dag, left, right, value_kind="aggregate"):
    """Fraction of instances whose max mass in ``left`` strictly beats ``right``.

    Nodes absent from an instance's support contribute 0, so an instance with
    no mass on either side is a tie and counts for neither direction.
    """
    if value_kind not in VALUE_KINDS:
        raise ValueError(f"value_kind must be one of {VALUE_KINDS}, not {value_kind!r}")
    left_nodes = sorted(dag.resolve_selector(left))
    right_nodes = sorted(dag.resolve_selector(right))
    n = 0
    wins = 0
    ties = 0
    for wd in wds:
        source = wd.aggregates if value_kind == "aggregate" else wd.values
        left_max = max((source.get(node, 0.0) for node in left_nodes), default=0.0)
        right_max = max((source.get(node, 0.0) for node in right_nodes), default=0.0)
        if left_max > right_max:
            wins += 1
        elif left_max == right_max:
            ties += 1
        n += 1
    if n == 0:
        raise EmptyCollection()
    return MetricReport(
        metric="subgraph-preference",
        params={
            "left": left.describe(),
            "right": right.describe(),
            "value_kind": value_kind,
        },
        value=wins / n,
        support={"instances": n, "wins": wins, "ties": ties},
    )


# ----------------------------------------------------------------- confusion

def concept_confusion(
    wds,
    dag,
    pairs="co-supported",
    pair_mode="raw",
    exclude_related=False,
    top=None,
    base=2,
):
    """Rank node pairs by how often the data treats them as jointly plausible.

    ``pairs`` selects the universe: ``"co-supported"`` materializes pairs that
    carry nonzero direct value together on at least one instance (the scalable
    exploratory mode), ``("level", L)`` takes every pair at one level, or pass
    an explicit list of (a, b) pairs.

    Per pair the score is the per-instance pair entropy of the two aggregated
    values, summed over the dataset and divided by ``n_instances * H(0.5, 0.5)``.
    ``raw`` mode takes the entropy terms of the aggregates as-is (a single
    instance can contribute slightly more than 1; values are not clamped);
    ``normalized`` rescales each pair to sum to 1 first, which keeps scores in
    [0, 1] and is forced for label/count evidence, where raw entropy terms of
    counts above 1 would be meaningless.
    """
    wds = list(wds)
    if not wds:
        raise EmptyCollection()
    if pair_mode not in PAIR_MODES:
        raise ValueError(f"pair_mode must be one of {PAIR_MODES}, not {pair_mode!r}")
    log = _log_fn(base)
    denom_unit = log(2.0)  # H([0.5, 0.5]) in the chosen base

    forced = False
    if pair_mode == "raw" and any(wd.kind == "labels" for wd in wds):
        pair_mode = "normalized"
        forced = True

    universe, co_support = _pair_universe(wds, dag, pairs)
    if exclude_related:
        universe = [p for p in universe if not dag.is_related(*p)]

    n = len(wds)
    scores = {}
    if pair_mode == "raw":
        totals = defaultdict(float)
        for wd in wds:
            for node, v in wd.aggregates.items():
                if v > 0:
                    totals[node] -= v * log(v)
        for a, b in universe:
            scores[(a, b)] = (totals[a] + totals[b]) / (n * denom_unit)
        if co_support is None:
            _, co_support = _joint_pair_stats(wds, universe, log=None)
    else:
        joint, agg_counts = _joint_pair_stats(wds, universe, log)
        for pair in universe:
            scores[pair] = joint.get(pair, 0.0) / (n * denom_unit)
        if co_support is None:
            co_support = agg_counts

    ranked = sorted(scores.items(), key=lambda item: (-item[1], item[0]))
    if top is not None:
        ranked = ranked[:top]
    pair_rows = [
        {"pair": [a, b], "value": score, "co_support": co_support.get((a, b), 0)}
        for (a, b), score in ranked
    ]
    mode_label = "normalized" if pair_mode == "normalized" else "raw"
    report = MetricReport(
        metric="concept-confusion",
        params={
            "pairs": _describe_pairs_param(pairs),
            "pair_mode": mode_label,
            "exclude_related": exclude_related,
            "base": _base_label(base),
            "top": top,
        },
        value=None,
        support={"instances": n, "pairs_scored": len(scores), "pairs_reported": len(pair_rows)},
        flags={"forced_normalized": forced},
        pairs=pair_rows,
        notes=(
            ["label evidence: raw entropy of counts is meaningless, used normalized mode"]
            if forced
            else []
        ),
    )
    return report


def _describe_pairs_param(pairs):
    if pairs == "co-supported":
        return "co-supported"
    if isinstance(pairs, tuple) and len(pairs) == 2 and pairs[0] == "level":
        return f"level:{pairs[1]}"
    return [list(p) for p in pairs]


def _canonical_pair(a, b):
    return (a, b) if a < b else (b, a)


def _pair_universe(wds, dag, pairs):
    """Returns (list of canonical pairs, co-support counts or None)."""
    if pairs == "co-supported":
        counts = defaultdict(int)
        for wd in wds:
            support = sorted(n for n, v in wd.values.items() if v > 0)
            for i, a in enumerate(support):
                for b in support[i + 1:]:
                    counts[(a, b)] += 1
        return sorted(counts), dict(counts)
    if isinstance(pairs, tuple) and len(pairs) == 2 and pairs[0] == "level":
        nodes = dag.nodes_at_level(pairs[1])
        return [(a, b) for i, a in enumerate(nodes) for b in nodes[i + 1:]], None
    universe = []
    for a, b in pairs:
        if a == b:
            raise SamePairNode(a)
        for node in (a, b):
            if node not in dag:
                raise UnknownNode(node, context="confusion pair")
        universe.append(_canonical_pair(a, b))
    return sorted(set(universe)), None


def _joint_pair_stats(wds, universe, log):
    """Per-pair stats over instances where both aggregates are positive.

    Returns (entropy sums after per-instance rescaling to sum 1, co-occurrence
    counts); the entropy map is None when ``log`` is None. Only co-positive
    instances matter: a fully one-sided pair normalizes to entropy 0.

    Two equivalent walks, chosen by universe size: small universes look up
    each support node's few partners; large ones (co-supported exploration on
    big label datasets) enumerate each instance's own support pairs and test
    membership, which stays near support^2 per instance instead of degrading
    with the hottest node's partner count.
    """
    pair_map = defaultdict(set)
    for a, b in universe:
        pair_map[a].add(b)
    acc = defaultdict(float) if log is not None else None
    counts = defaultdict(int)
    entropy_cache = {}

    def touch(a, b, va, vb):
        counts[(a, b)] += 1
        if acc is None:
            return
        key = (va, vb)
        ent = entropy_cache.get(key)
        if ent is None:
            p = va / (va + vb)
            q = 1.0 - p
            ent = 0.0
            if p > 0:
                ent -= p * log(p)
            if q > 0:
                ent -= q * log(q)
            entropy_cache[key] = ent
        acc[(a, b)] += ent

    if len(universe) <= 512:
        for wd in wds:
            agg = wd.aggregates
            for a in agg:
                others = pair_map.get(a)
                if not others:
                    continue
                va = agg[a]
                if va <= 0:
                    continue
                for b in others:
                    vb = agg.get(b, 0.0)
                    if vb > 0:
                        touch(a, b, va, vb)
    else:
        for wd in wds:
            support = sorted(n for n, v in wd.aggregates.items() if v > 0)
            agg = wd.aggregates
            for i, a in enumerate(support):
                others = pair_map.get(a)
                if not others:
                    continue
                for b in support[i + 1:]:
                    if b in others:
                        touch(a, b, agg[a], agg[b])
    return acc, dict(counts)


# -------------------------------------------------------------------- acc@k

def acc_at_k(items, dag, truths, k):
    """Fraction of instances whose truth node ranks in the k highest values.

    Works on InstanceRecords or WeightedDags; ranking uses direct values (not
    aggregates), ties break by node id, and a truth node with zero mass never
    counts as ranked.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    n = 0
    hits = 0
    for item in items:
        vmap = getattr(item, "node_values", None)
        if vmap is None:
            vmap = item.values
        truth = truths.get(item.instance_id)
        if truth is None:
            raise MissingTruth(item.instance_id)
        n += 1
        target = vmap.get(truth, 0.0)
        if target <= 0:
            continue
        rank = 1
        for node, value in vmap.items():
            if node == truth:
                continue
            if value > target or (value == target and node < truth):
                rank += 1
                if rank > k:
                    break
        if rank <= k:
            hits += 1
    if n == 0:
        raise EmptyCollection()
    return MetricReport(
        metric="acc-at-k",
        params={"k": k},
        value=hits / n,
        support={"instances": n, "hits": hits},
    )


# ----------------------------------------------------------------- grouping

def group_by_concept(metric_fn, wds, dag, truths, grouping_level):
    """Partition instances by their truth's ancestor at a level, then apply a metric.

    ``metric_fn`` maps a sub-collection of weighted DAGs to a MetricReport.
    Instances whose truth has several ancestors at the grouping level count in
    each group; instances with none are tallied as unassigned.
    """
    dag.nodes_at_level(grouping_level)
    buckets = defaultdict(list)
    unassigned = 0
    total = 0
    for wd in wds:
        truth = truths.get(wd.instance_id)
        if truth is None:
            raise MissingTruth(wd.instance_id)
        total += 1
        groups = dag.ancestor_at_level(truth, grouping_level)
        if not groups:
            unassigned += 1
        for group in groups:
            buckets[group].append(wd)

    groups = {}
    inner_metric = None
    inner_params = {}
    for group in sorted(buckets):
        report = metric_fn(buckets[group])
        inner_metric = report.metric
        inner_params = report.params
        groups[group] = {
            "value": report.value,
            "support": report.support,
            "flags": report.flags,
        }
    return MetricReport(
        metric=f"{inner_metric or 'metric'}-by-concept",
        params={**inner_params, "grouping_level": grouping_level},
        value=None,
        support={"instances": total, "groups": len(groups), "unassigned": unassigned},
        groups=groups,
    )

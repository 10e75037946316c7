"""Turn one instance's evidence into a weighted DAG of values and aggregates.

Each node carries two numbers: ``value`` (the mass the model or dataset put
directly on that node) and ``aggregated_value`` (the propagated mass). Two
propagation modes exist because they disagree on non-tree graphs:

* ``descendant-set`` (default): a node's aggregate is the sum of values over
  the node and its descendant closure, each descendant counted once. On a
  diamond (leaf with two parents sharing a grandparent), one unit of leaf
  mass reaches the grandparent as 1.
* ``literal-child-sum``: a node's aggregate is its own value plus the sum of
  its children's aggregates, computed bottom-up. The same diamond yields 2 at
  the grandparent, since the leaf's mass arrives once per parent.

The two modes coincide exactly on trees. Aggregates are stored sparsely:
only nodes with nonzero propagated mass appear.
"""

import json
import math
import warnings
from dataclasses import dataclass

from .dag import AbstractionDag
from .ingest import InstanceRecord

PROPAGATION_MODES = ("descendant-set", "literal-child-sum")

# accepted shorthand on CLI and API surfaces
_MODE_ALIASES = {"descendant-set": "descendant-set", "literal": "literal-child-sum",
                 "literal-child-sum": "literal-child-sum"}


class LevelOrderWarning(UserWarning):
    """Literal mode was asked for on a DAG whose levels are not a topological
    order; evaluation fell back to an explicit dependency order."""


@dataclass(frozen=True)
class WeightedDag:
    """Per-instance sparse map of node -> (value, aggregated value)."""

    instance_id: str
    values: dict
    aggregates: dict
    dropped_mass: float = 0.0
    kind: str = "sparse"

    def value(self, node_id):
        return self.values.get(node_id, 0.0)

    def aggregate(self, node_id):
        return self.aggregates.get(node_id, 0.0)


def normalize_mode(mode: str) -> str:
    resolved = _MODE_ALIASES.get(mode)
    if resolved is None:
        raise ValueError(f"mode must be one of {sorted(set(_MODE_ALIASES))}, not {mode!r}")
    return resolved


def propagate(dag: AbstractionDag, record: InstanceRecord, mode: str = "descendant-set") -> WeightedDag:
    """Build the weighted DAG for one instance.

    Label evidence arrives with value 1 per labeled node, so aggregates are
    occurrence counts. Work is proportional to the evidence support times the
    DAG depth, not to the DAG size.
    """
    mode = normalize_mode(mode)
    values = {n: v for n, v in record.node_values.items() if v != 0}
    for node_id in values:
        if node_id not in dag:
            raise KeyError(f"record {record.instance_id!r} names unknown node {node_id!r}")

    if mode == "descendant-set":
        aggregates = _descendant_set_aggregates(dag, values)
    else:
        aggregates = _literal_child_sum_aggregates(dag, values)

    return WeightedDag(
        instance_id=record.instance_id,
        values=values,
        aggregates=aggregates,
        dropped_mass=record.dropped_mass,
        kind=record.kind,
    )


# Aggregates in both modes are fsum'ed over each node's full contribution
# multiset, so a node's aggregate is the correctly rounded value of the exact
# real sum. That makes results independent of traversal order and makes the
# two modes agree bit-for-bit on trees, where their multisets coincide.

def _descendant_set_aggregates(dag, values):
    contributions = {}
    for node_id, value in values.items():
        contributions.setdefault(node_id, []).append(value)
        for ancestor in dag.ancestors(node_id):
            contributions.setdefault(ancestor, []).append(value)
    return {
        node: total
        for node, vs in contributions.items()
        if (total := vs[0] if len(vs) == 1 else math.fsum(vs)) != 0
    }


def _literal_child_sum_aggregates(dag, values):
    if not _levels_are_topological(dag):
        warnings.warn(
            "DAG levels do not order children before parents; "
            "literal-child-sum used an explicit dependency order instead",
            LevelOrderWarning,
            stacklevel=3,
        )
    # the child-sum recurrence routes one copy of a node's value along every
    # distinct upward path, so each ancestor receives value * path_count
    contributions = {}
    for node_id, value in values.items():
        for target, paths in _upward_path_counts(dag, node_id).items():
            contributions.setdefault(target, []).append(
                value if paths == 1 else value * paths
            )
    return {
        node: total
        for node, vs in contributions.items()
        if (total := vs[0] if len(vs) == 1 else math.fsum(vs)) != 0
    }


def _upward_path_counts(dag, origin):
    """Number of distinct child-to-parent paths from origin to each ancestor."""
    cone = {origin} | set(dag.ancestors(origin))
    counts = {}
    stack = [n for n in cone]
    while stack:
        node = stack[-1]
        if node in counts:
            stack.pop()
            continue
        pending = [c for c in dag.children(node) if c in cone and c not in counts]
        if pending:
            stack.extend(pending)
            continue
        stack.pop()
        total = 1 if node == origin else 0
        for child in dag.children(node):
            if child in cone:
                total += counts[child]
        counts[node] = total
    return counts


_TOPO_CACHE_ATTR = "_levels_topological"


def _levels_are_topological(dag):
    cached = getattr(dag, _TOPO_CACHE_ATTR, None)
    if cached is None:
        cached = all(
            dag.level_of(child) < dag.level_of(parent) for child, parent in dag.edges()
        )
        setattr(dag, _TOPO_CACHE_ATTR, cached)
    return cached


# ------------------------------------------------------------- persistence

def wd_to_dict(wd: WeightedDag) -> dict:
    """Stable dict form shared by the CLI writer and the API server."""
    out = {
        "instance_id": wd.instance_id,
        "values": {k: wd.values[k] for k in sorted(wd.values)},
        "aggregates": {k: wd.aggregates[k] for k in sorted(wd.aggregates)},
        "kind": wd.kind,
    }
    if wd.dropped_mass:
        out["dropped_mass"] = wd.dropped_mass
    return out


def write_weighted_jsonl(wds, fh):
    for wd in wds:
        fh.write(json.dumps(wd_to_dict(wd), sort_keys=True, ensure_ascii=False))
        fh.write("\n")


def read_weighted_jsonl(fh):
    out = []
    for line in fh:
        if not line.strip():
            continue
        payload = json.loads(line)
        out.append(
            WeightedDag(
                instance_id=payload["instance_id"],
                values=payload.get("values", {}),
                aggregates=payload.get("aggregates", {}),
                dropped_mass=payload.get("dropped_mass", 0.0),
                kind=payload.get("kind", "sparse"),
            )
        )
    return out

"""absalign: measure how closely model outputs follow a human concept hierarchy.

The pipeline: parse a hierarchy and per-instance model outputs or label sets,
propagate each instance's mass through the hierarchy, then compute alignment
metrics, filter instances by behavior patterns, or serve the whole session
over a read-only JSON API.
"""

from .dag import AbstractionDag, SubgraphSelector, build_dag
from .errors import AbsalignError
from .ingest import (
    InstanceRecord,
    OutputMapping,
    parse_hierarchy,
    parse_instances,
    parse_truth,
    serialize_instance,
)
from .metrics import (
    LevelDistribution,
    MetricReport,
    acc_at_k,
    accuracy_alignment,
    concept_confusion,
    group_by_concept,
    level_entropy,
    subgraph_preference,
    top1_accuracy,
    uncertainty_alignment,
)
from .propagate import WeightedDag, propagate, read_weighted_jsonl, write_weighted_jsonl
from .query import PatternQuery, filter_instances, parse_query
from .session import Session, SessionConfig

__version__ = "0.1.0"

__all__ = [
    "AbsalignError",
    "AbstractionDag",
    "InstanceRecord",
    "LevelDistribution",
    "MetricReport",
    "OutputMapping",
    "PatternQuery",
    "Session",
    "SessionConfig",
    "SubgraphSelector",
    "WeightedDag",
    "acc_at_k",
    "accuracy_alignment",
    "build_dag",
    "concept_confusion",
    "filter_instances",
    "group_by_concept",
    "level_entropy",
    "parse_hierarchy",
    "parse_instances",
    "parse_query",
    "parse_truth",
    "propagate",
    "read_weighted_jsonl",
    "serialize_instance",
    "subgraph_preference",
    "top1_accuracy",
    "uncertainty_alignment",
    "write_weighted_jsonl",
]

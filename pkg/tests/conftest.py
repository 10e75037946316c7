import json
from pathlib import Path

import pytest

from absalign import build_dag, parse_hierarchy, propagate
from absalign.ingest import InstanceRecord

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def four_leaf_dag():
    parsed = parse_hierarchy(FIXTURES / "four_leaf.json")
    return build_dag(parsed.nodes, parsed.edges)


@pytest.fixture(scope="session")
def cifar_dag():
    parsed = parse_hierarchy(FIXTURES / "cifar.json")
    return build_dag(parsed.nodes, parsed.edges)


@pytest.fixture()
def diamond_dag():
    # one leaf with two parents sharing a grandparent
    return build_dag(
        [("x", "x"), ("m1", "m1"), ("m2", "m2"), ("t", "t")],
        [("x", "m1"), ("x", "m2"), ("m1", "t"), ("m2", "t")],
    )


@pytest.fixture()
def four_leaf_record():
    return InstanceRecord(
        "inst-1", "dense",
        {"a1": 0.4, "a2": 0.3, "b1": 0.2, "b2": 0.1},
        raw=(0.4, 0.3, 0.2, 0.1),
    )


@pytest.fixture()
def four_leaf_wd(four_leaf_dag, four_leaf_record):
    return propagate(four_leaf_dag, four_leaf_record)


def sparse_record(instance_id, values, kind="sparse"):
    return InstanceRecord(instance_id, kind, dict(values))


def label_record(instance_id, labels):
    return InstanceRecord(instance_id, "labels", {label: 1.0 for label in labels})


def write_jsonl(path, rows):
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")
    return str(path)

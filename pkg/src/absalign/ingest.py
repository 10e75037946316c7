"""File ingestion: hierarchies, model outputs / label sets, and truth labels.

Hierarchy formats (auto-detected from the file extension, overridable):

* ``json``: ``{"nodes": [{"id": "maple", "name": "maple tree", "parents": ["tree"]}, ...]}``
  where ``parents`` may be empty or absent for roots.
* ``tsv``: one ``child<TAB>parent`` edge per line; ``#`` starts a comment;
  display names default to the ids.
* ``icd9``: the json layout plus an optional per-node ``"codable"`` boolean
  (medical coding systems label non-leaf nodes directly).

Instance files are JSON Lines, one record per line:

* dense:  ``{"instance_id": "img-0001", "probs": [0.01, ...]}`` interpreted
  through a sidecar mapping ``{"outputs": ["apple", ...]}``; a ``null`` entry
  in ``outputs`` drops that output index and tallies its mass per instance.
* sparse: ``{"instance_id": "q-17", "values": {"alberta": 0.31, "canada": 0.22}}``
* labels: ``{"instance_id": "note-77", "labels": ["428.0", "401.9"]}``

Truth files are JSON Lines ``{"instance_id": "img-0001", "label": "maple"}``.

Values are accepted unnormalized by default; pass ``normalized=True`` to
enforce that dense vectors sum to 1 within 1e-6. All files are UTF-8 and node
ids compare byte-wise.
"""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, NamedTuple

from .dag import AbstractionDag
from .errors import (
    DuplicateInstanceId,
    DuplicateNode,
    LengthMismatch,
    MalformedLine,
    NegativeValue,
    NotNormalized,
    UnknownFormat,
    UnknownNode,
    UnknownNodeKey,
)

NORMALIZATION_TOLERANCE = 1e-6

EVIDENCE_KINDS = ("dense", "sparse", "labels")

_EVIDENCE_KEY = {"probs": "dense", "values": "sparse", "labels": "labels"}


class ParsedHierarchy(NamedTuple):
    nodes: list          # (id, name) pairs
    edges: list          # (child, parent) pairs
    codable: dict        # id -> bool, only for ids the source flagged


class OutputMapping:
    """Ordered map from dense-output index to node id.

    Entries equal to ``None`` mean "this output has no node in the hierarchy";
    their probability mass is recorded per instance as dropped mass instead of
    being an error.
    """

    def __init__(self, outputs):
        self.outputs = list(outputs)
        seen = set()
        for node_id in self.outputs:
            if node_id is None:
                continue
            if node_id in seen:
                raise DuplicateNode(node_id)
            seen.add(node_id)

    def __len__(self):
        return len(self.outputs)

    @classmethod
    def from_file(cls, path):
        with open(path, encoding="utf-8") as fh:
            try:
                payload = json.load(fh)
            except json.JSONDecodeError as exc:
                raise MalformedLine(path, exc.lineno, f"invalid JSON: {exc.msg}") from None
        if not isinstance(payload, dict) or not isinstance(payload.get("outputs"), list):
            raise MalformedLine(path, 1, 'mapping file needs {"outputs": [...]}')
        return cls(payload["outputs"])

    def validate_against(self, dag: AbstractionDag):
        for node_id in self.outputs:
            if node_id is not None and node_id not in dag:
                raise UnknownNode(node_id, context="output mapping")
        return self


@dataclass(frozen=True)
class InstanceRecord:
    """One dataset instance's evidence, resolved to node ids.

    ``node_values`` holds only nonzero entries. For dense evidence the original
    probability vector is kept in ``raw`` so serialization round-trips.
    """

    instance_id: str
    kind: str
    node_values: dict
    dropped_mass: float = 0.0
    raw: tuple | None = None
    truth: str | None = None


def detect_format(path, fmt=None):
    if fmt is not None:
        if fmt not in ("json", "tsv", "icd9"):
            raise UnknownFormat(f"{fmt!r} (expected json, tsv, or icd9)")
        return fmt
    suffix = Path(path).suffix.lower()
    if suffix == ".json":
        return "json"
    if suffix in (".tsv", ".txt", ".edges"):
        return "tsv"
    raise UnknownFormat(f"cannot infer format from {path!r}; pass one of json, tsv, icd9")


def parse_hierarchy(path, fmt=None) -> ParsedHierarchy:
    """Read a hierarchy file into (nodes, edges, codable) ready for build_dag."""
    fmt = detect_format(path, fmt)
    if fmt in ("json", "icd9"):
        return _parse_hierarchy_json(path)
    return _parse_hierarchy_tsv(path)


def _parse_hierarchy_json(path):
    with open(path, encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise MalformedLine(path, exc.lineno, f"invalid JSON: {exc.msg}") from None
    if not isinstance(payload, dict) or "nodes" not in payload:
        raise MalformedLine(path, 1, 'hierarchy JSON needs a top-level {"nodes": [...]}')
    entries = payload["nodes"]
    if not isinstance(entries, list) or not entries:
        raise MalformedLine(path, 1, "empty node list")
    nodes, edges, codable = [], [], {}
    for pos, entry in enumerate(entries):
        if not isinstance(entry, dict) or not entry.get("id"):
            raise MalformedLine(path, 1, f'node #{pos} needs a non-empty "id"')
        node_id = entry["id"]
        if not isinstance(node_id, str):
            raise MalformedLine(path, 1, f"node #{pos} id must be a string")
        nodes.append((node_id, entry.get("name") or node_id))
        parents = entry.get("parents") or []
        if not isinstance(parents, list):
            raise MalformedLine(path, 1, f'node {node_id!r}: "parents" must be a list')
        for parent in parents:
            edges.append((node_id, parent))
        if "codable" in entry:
            codable[node_id] = bool(entry["codable"])
    return ParsedHierarchy(nodes, edges, codable)


def _parse_hierarchy_tsv(path):
    nodes, edges = [], []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            parts = stripped.split("\t")
            if len(parts) != 2 or not parts[0] or not parts[1]:
                raise MalformedLine(path, lineno, "expected exactly child<TAB>parent")
            child, parent = parts
            for node_id in (child, parent):
                if node_id not in seen:
                    seen.add(node_id)
                    nodes.append((node_id, node_id))
            edges.append((child, parent))
    if not nodes:
        raise MalformedLine(path, 1, "empty input: no edges found")
    return ParsedHierarchy(nodes, edges, {})


def parse_instances(
    path,
    dag: AbstractionDag,
    mapping: OutputMapping | None = None,
    kind: str | None = None,
    normalized: bool = False,
    allow_unknown: bool = False,
) -> Iterator[InstanceRecord]:
    """Stream InstanceRecords out of a JSON Lines file, one record in memory at a time.

    ``kind`` pins the expected evidence kind; by default each record is
    classified by its payload key. ``mapping`` is required for dense records.
    ``allow_unknown`` turns unknown sparse keys / labels into dropped mass
    instead of an error (dense records handle out-of-vocabulary outputs via
    ``null`` mapping entries).
    """
    if kind is not None and kind not in EVIDENCE_KINDS:
        raise ValueError(f"kind must be one of {EVIDENCE_KINDS}, not {kind!r}")
    seen_ids = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                payload = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedLine(path, lineno, f"invalid JSON: {exc.msg}") from None
            if not isinstance(payload, dict):
                raise MalformedLine(path, lineno, "each line must be a JSON object")
            instance_id = payload.get("instance_id")
            if not instance_id or not isinstance(instance_id, str):
                raise MalformedLine(path, lineno, 'missing or empty "instance_id"')
            if instance_id in seen_ids:
                raise DuplicateInstanceId(path, lineno, instance_id)
            seen_ids.add(instance_id)

            present = [k for k in _EVIDENCE_KEY if k in payload]
            if len(present) != 1:
                raise MalformedLine(
                    path, lineno, 'expected exactly one of "probs", "values", "labels"'
                )
            record_kind = _EVIDENCE_KEY[present[0]]
            if kind is not None and record_kind != kind:
                raise MalformedLine(
                    path, lineno, f"expected {kind} evidence but found {record_kind}"
                )
            if record_kind == "dense":
                yield _dense_record(path, lineno, instance_id, payload["probs"], mapping, normalized)
            elif record_kind == "sparse":
                yield _sparse_record(path, lineno, instance_id, payload["values"], dag, allow_unknown)
            else:
                yield _label_record(path, lineno, instance_id, payload["labels"], dag, allow_unknown)


def _dense_record(path, lineno, instance_id, probs, mapping, normalized):
    if mapping is None:
        raise ValueError("dense records need an output mapping")
    if not isinstance(probs, list):
        raise MalformedLine(path, lineno, '"probs" must be a list of numbers')
    if len(probs) != len(mapping):
        raise LengthMismatch(path, lineno, len(probs), len(mapping))
    total = 0.0
    for p in probs:
        if not isinstance(p, (int, float)):
            raise MalformedLine(path, lineno, "probabilities must be numbers")
        if p < 0:
            raise NegativeValue(path, lineno, repr(p))
        total += p
    if normalized and abs(total - 1.0) > NORMALIZATION_TOLERANCE:
        raise NotNormalized(path, lineno, total)
    node_values = {}
    dropped = 0.0
    for node_id, p in zip(mapping.outputs, probs):
        if node_id is None:
            dropped += p
        elif p != 0:
            node_values[node_id] = node_values.get(node_id, 0.0) + float(p)
    return InstanceRecord(
        instance_id, "dense", node_values, dropped_mass=dropped, raw=tuple(float(p) for p in probs)
    )


def _sparse_record(path, lineno, instance_id, values, dag, allow_unknown):
    if not isinstance(values, dict):
        raise MalformedLine(path, lineno, '"values" must be an object of node -> number')
    node_values = {}
    dropped = 0.0
    for key, value in values.items():
        if not isinstance(value, (int, float)):
            raise MalformedLine(path, lineno, f"value for {key!r} must be a number")
        if value < 0:
            raise NegativeValue(path, lineno, f"{value!r} for {key!r}")
        if value > 1:
            raise MalformedLine(path, lineno, f"sparse value {value!r} for {key!r} exceeds 1")
        if key not in dag:
            if allow_unknown:
                dropped += value
                continue
            raise UnknownNodeKey(path, lineno, key)
        if value != 0:
            node_values[key] = float(value)
    return InstanceRecord(instance_id, "sparse", node_values, dropped_mass=dropped)


def _label_record(path, lineno, instance_id, labels, dag, allow_unknown):
    if not isinstance(labels, list):
        raise MalformedLine(path, lineno, '"labels" must be a list of node ids')
    node_values = {}
    dropped = 0.0
    for label in labels:
        if not isinstance(label, str) or not label:
            raise MalformedLine(path, lineno, "labels must be non-empty strings")
        if label in node_values:
            raise MalformedLine(path, lineno, f"duplicate label {label!r}")
        if label not in dag:
            if allow_unknown:
                dropped += 1.0
                continue
            raise UnknownNodeKey(path, lineno, label)
        node_values[label] = 1.0
    return InstanceRecord(instance_id, "labels", node_values, dropped_mass=dropped)


def parse_truth(path, dag: AbstractionDag) -> dict:
    """Read a JSON Lines truth file into {instance_id: node_id}, fully validated."""
    truths = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                payload = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedLine(path, lineno, f"invalid JSON: {exc.msg}") from None
            if not isinstance(payload, dict) or "instance_id" not in payload or "label" not in payload:
                raise MalformedLine(path, lineno, 'expected {"instance_id": ..., "label": ...}')
            instance_id = payload["instance_id"]
            label = payload["label"]
            if instance_id in truths:
                raise DuplicateInstanceId(path, lineno, instance_id)
            if label not in dag:
                raise UnknownNode(label, context=f"{path}:{lineno}")
            truths[instance_id] = label
    return truths


def serialize_instance(record: InstanceRecord) -> str:
    """One JSON line in the same shape the record was parsed from."""
    if record.kind == "dense":
        payload = {"instance_id": record.instance_id, "probs": list(record.raw or ())}
    elif record.kind == "sparse":
        payload = {
            "instance_id": record.instance_id,
            "values": {k: record.node_values[k] for k in sorted(record.node_values)},
        }
    else:
        payload = {"instance_id": record.instance_id, "labels": sorted(record.node_values)}
    return json.dumps(payload, sort_keys=True, ensure_ascii=False)

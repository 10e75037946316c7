"""An analysis session: one hierarchy, one instance file, optional truth labels.

Loading is all-or-nothing: every referenced file is parsed and validated
before anything is computed, so a session never holds partial state. The
weighted DAGs are computed lazily, optionally persisted to a cache directory
keyed by a digest of the inputs, and immutable once built.
"""

import hashlib
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

from .dag import build_dag
from .ingest import OutputMapping, parse_hierarchy, parse_instances, parse_truth
from .propagate import normalize_mode, propagate, read_weighted_jsonl, write_weighted_jsonl


@dataclass
class SessionConfig:
    dag_path: str
    dag_format: str | None = None
    instances_path: str | None = None
    kind: str | None = None
    mapping_path: str | None = None
    truth_path: str | None = None
    mode: str = "descendant-set"
    base: str = "2"
    normalized: bool = False
    min_mass: float = 0.1
    threads: int | None = None
    cache_dir: str | None = None


class Session:
    """Immutable bundle of DAG + instances + truths with cached propagation."""

    def __init__(self, config, dag, records, truths, mapping, codable):
        self.config = config
        self.dag = dag
        self.records = records
        self.truths = truths
        self.mapping = mapping
        self.codable = codable
        self._weighted = None
        self._by_id = {r.instance_id: i for i, r in enumerate(records)}

    @classmethod
    def load(cls, config: SessionConfig) -> "Session":
        parsed = parse_hierarchy(config.dag_path, config.dag_format)
        dag = build_dag(parsed.nodes, parsed.edges)
        mapping = None
        if config.mapping_path:
            mapping = OutputMapping.from_file(config.mapping_path).validate_against(dag)
        records = []
        if config.instances_path:
            records = list(
                parse_instances(
                    config.instances_path,
                    dag,
                    mapping=mapping,
                    kind=config.kind,
                    normalized=config.normalized,
                )
            )
        truths = {}
        if config.truth_path:
            truths = parse_truth(config.truth_path, dag)
            records = [
                replace(r, truth=truths[r.instance_id]) if r.instance_id in truths else r
                for r in records
            ]
        return cls(config, dag, records, truths, mapping, parsed.codable)

    # ---------------------------------------------------------- propagation

    def weighted(self):
        """Weighted DAGs for every instance, computed once (or read from cache)."""
        if self._weighted is None:
            self._weighted = self._load_or_compute()
        return self._weighted

    def weighted_for(self, instance_id):
        index = self._by_id.get(instance_id)
        if index is None:
            return None
        return self.weighted()[index]

    def _load_or_compute(self):
        cache_path = self._cache_path()
        if cache_path is not None and cache_path.exists():
            with open(cache_path, encoding="utf-8") as fh:
                cached = read_weighted_jsonl(fh)
            if len(cached) == len(self.records):
                return cached
        mode = normalize_mode(self.config.mode)
        threads = self.config.threads or os.cpu_count() or 1
        if threads > 1 and len(self.records) > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                wds = list(pool.map(
                    lambda record: propagate(self.dag, record, mode),
                    self.records,
                    chunksize=256,
                ))
        else:
            wds = [propagate(self.dag, record, mode) for record in self.records]
        if cache_path is not None:
            tmp = cache_path.with_suffix(".tmp")
            with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
                write_weighted_jsonl(wds, fh)
            os.replace(tmp, cache_path)
        return wds

    def _cache_path(self):
        if not self.config.cache_dir or not self.config.instances_path:
            return None
        digest = hashlib.sha256()
        for path in (self.config.dag_path, self.config.mapping_path, self.config.instances_path):
            if path:
                digest.update(Path(path).read_bytes())
            digest.update(b"\x00")
        digest.update(normalize_mode(self.config.mode).encode())
        cache_dir = Path(self.config.cache_dir)
        cache_dir.mkdir(parents=True, exist_ok=True)
        return cache_dir / f"weighted-{digest.hexdigest()[:16]}.jsonl"

    # ------------------------------------------------------------ summaries

    def level_summary(self):
        return [
            {"level": level, "count": len(self.dag.nodes_at_level(level))}
            for level in self.dag.levels
        ]

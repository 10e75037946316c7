"""Concept hierarchy core: a DAG of child-to-parent edges with leaf-anchored levels.

Nodes are short string ids. Edges point from the more specific concept to the
more general one, so "maple -> tree" reads "maple is a kind of tree". A node's
level is 1 + the length of the shortest path down to a leaf; leaves sit at
level 1. The graph is validated once at build time and is immutable afterward,
so instances are safe to share across threads.
"""

from collections import deque
from dataclasses import dataclass

from .errors import (
    CycleDetected,
    DuplicateNode,
    EmptySelection,
    UnknownLevel,
    UnknownNode,
)

SELECTOR_KINDS = (
    "single",
    "with-descendants",
    "ancestors-only",
    "ancestors-and-descendants-and-self",
    "level-slice",
    "all-nodes",
)

# short aliases used on the command line and in URLs
_SELECTOR_ALIASES = {
    "node": "single",
    "down": "with-descendants",
    "up": "ancestors-only",
    "updown": "ancestors-and-descendants-and-self",
    "level": "level-slice",
    "all": "all-nodes",
}


@dataclass(frozen=True)
class SubgraphSelector:
    """Declarative description of a node set inside a DAG.

    ``anchor`` is required for every kind except ``level-slice`` and
    ``all-nodes``; ``level`` is required only for ``level-slice``.
    """

    kind: str
    anchor: str | None = None
    level: int | None = None

    @classmethod
    def from_text(cls, text: str) -> "SubgraphSelector":
        """Parse the compact form: node:ID, down:ID, up:ID, updown:ID, level:L, all."""
        text = text.strip()
        if text == "all":
            return cls("all-nodes")
        head, sep, rest = text.partition(":")
        if not sep or not rest:
            raise ValueError(f"bad selector {text!r}; expected e.g. node:ID or level:2 or all")
        kind = _SELECTOR_ALIASES.get(head)
        if kind is None:
            raise ValueError(f"bad selector kind {head!r}; one of {sorted(_SELECTOR_ALIASES)}")
        if kind == "level-slice":
            try:
                return cls(kind, level=int(rest))
            except ValueError:
                raise ValueError(f"bad selector level {rest!r}; expected an integer") from None
        return cls(kind, anchor=rest)

    def describe(self) -> str:
        if self.kind == "all-nodes":
            return "all"
        if self.kind == "level-slice":
            return f"level:{self.level}"
        alias = {v: k for k, v in _SELECTOR_ALIASES.items()}[self.kind]
        return f"{alias}:{self.anchor}"


class AbstractionDag:
    """Validated, immutable concept DAG with levels and closure queries.

    Built through :func:`build_dag`; all public methods are reads. Ancestor and
    descendant closures are memoized per node (cache fills are idempotent, so
    concurrent readers are fine).
    """

    def __init__(self, names, parents, children, levels):
        self._names = names          # id -> display name
        self._parents = parents      # id -> tuple of parent ids (sorted)
        self._children = children    # id -> tuple of child ids (sorted)
        self._levels = levels        # id -> level int
        self._level_values = tuple(sorted(set(levels.values())))
        self._by_level = {}
        for node, level in levels.items():
            self._by_level.setdefault(level, []).append(node)
        for level in self._by_level:
            self._by_level[level].sort()
        self._roots = tuple(sorted(n for n in names if not parents[n]))
        self._leaves = tuple(sorted(n for n in names if not children[n]))
        self._ancestor_cache = {}
        self._descendant_cache = {}

    # ------------------------------------------------------------- basics

    def __len__(self):
        return len(self._names)

    def __contains__(self, node_id):
        return node_id in self._names

    def nodes(self):
        """All node ids in sorted order."""
        return sorted(self._names)

    def name(self, node_id):
        self._check(node_id)
        return self._names[node_id]

    def parents(self, node_id):
        self._check(node_id)
        return self._parents[node_id]

    def children(self, node_id):
        self._check(node_id)
        return self._children[node_id]

    def edges(self):
        """All (child, parent) pairs in sorted order."""
        out = []
        for child in sorted(self._parents):
            for parent in self._parents[child]:
                out.append((child, parent))
        return out

    @property
    def roots(self):
        return self._roots

    @property
    def leaves(self):
        return self._leaves

    # ------------------------------------------------------------- levels

    @property
    def levels(self):
        """Sorted tuple of the distinct level values present in the DAG."""
        return self._level_values

    def level_of(self, node_id):
        self._check(node_id)
        return self._levels[node_id]

    def nodes_at_level(self, level):
        """Node ids at the given level, sorted. Raises UnknownLevel."""
        if level not in self._by_level:
            raise UnknownLevel(level, known=self._level_values)
        return list(self._by_level[level])

    # ----------------------------------------------------------- closures

    def ancestors(self, node_id):
        """Every node reachable by walking parent edges, excluding the node."""
        self._check(node_id)
        cached = self._ancestor_cache.get(node_id)
        if cached is None:
            cached = self._closure(node_id, self._parents)
            self._ancestor_cache[node_id] = cached
        return cached

    def descendants(self, node_id):
        """Every node reachable by walking child edges, excluding the node."""
        self._check(node_id)
        cached = self._descendant_cache.get(node_id)
        if cached is None:
            cached = self._closure(node_id, self._children)
            self._descendant_cache[node_id] = cached
        return cached

    def relatives(self, node_id, direction):
        """Transitive closure in one direction: 'ancestors' or 'descendants'."""
        if direction == "ancestors":
            return self.ancestors(node_id)
        if direction == "descendants":
            return self.descendants(node_id)
        raise ValueError(f"direction must be 'ancestors' or 'descendants', not {direction!r}")

    def ancestor_at_level(self, node_id, level):
        """Ancestors of the node (or the node itself) sitting at the requested level.

        Exactly one element for tree-shaped hierarchies; several are possible
        under multi-parenting, and the set may be empty when an edge skips
        the requested level.
        """
        self._check(node_id)
        if level not in self._by_level:
            raise UnknownLevel(level, known=self._level_values)
        found = set()
        if self._levels[node_id] == level:
            found.add(node_id)
        for anc in self.ancestors(node_id):
            if self._levels[anc] == level:
                found.add(anc)
        return found

    def is_related(self, a, b):
        """True when one node is an ancestor of the other."""
        return a in self.ancestors(b) or b in self.ancestors(a)

    # ----------------------------------------------------------- selectors

    def resolve_selector(self, sel: SubgraphSelector):
        """Materialize a selector into a non-empty set of node ids."""
        if sel.kind not in SELECTOR_KINDS:
            raise ValueError(f"unknown selector kind {sel.kind!r}")
        if sel.kind == "all-nodes":
            return set(self._names)
        if sel.kind == "level-slice":
            if sel.level is None:
                raise ValueError("level-slice selector requires a level")
            return set(self.nodes_at_level(sel.level))
        if sel.anchor is None:
            raise ValueError(f"selector kind {sel.kind!r} requires an anchor node")
        self._check(sel.anchor)
        if sel.kind == "single":
            return {sel.anchor}
        if sel.kind == "with-descendants":
            return {sel.anchor} | set(self.descendants(sel.anchor))
        if sel.kind == "ancestors-only":
            result = set(self.ancestors(sel.anchor))
            if not result:
                raise EmptySelection(sel.describe())
            return result
        # ancestors-and-descendants-and-self
        return {sel.anchor} | set(self.ancestors(sel.anchor)) | set(self.descendants(sel.anchor))

    # ------------------------------------------------------- serialization

    def to_dict(self):
        """Plain-dict description; feeding nodes/parents back through build_dag
        reconstructs an identical DAG."""
        return {
            "nodes": [
                {
                    "id": node,
                    "name": self._names[node],
                    "parents": list(self._parents[node]),
                    "level": self._levels[node],
                }
                for node in sorted(self._names)
            ],
            "levels": [
                {"level": level, "count": len(self._by_level[level])}
                for level in self._level_values
            ],
            "roots": list(self._roots),
            "leaves": list(self._leaves),
        }

    # ------------------------------------------------------------ internal

    def _check(self, node_id):
        if node_id not in self._names:
            raise UnknownNode(node_id)

    def _closure(self, node_id, adjacency):
        seen = set()
        queue = deque(adjacency[node_id])
        while queue:
            current = queue.popleft()
            if current in seen:
                continue
            seen.add(current)
            queue.extend(adjacency[current])
        return frozenset(seen)


def build_dag(nodes, edges) -> AbstractionDag:
    """Validate nodes and child->parent edges and compute levels.

    ``nodes`` is an iterable of (id, display name) pairs; ``edges`` of
    (child id, parent id) pairs. Duplicate edges are tolerated. Multiple
    roots are allowed and no virtual root is inserted.

    Raises DuplicateNode, UnknownNode, or CycleDetected.
    """
    names = {}
    for node_id, name in nodes:
        if node_id in names:
            raise DuplicateNode(node_id)
        if not node_id:
            raise ValueError("node ids must be non-empty strings")
        names[node_id] = name if name else node_id
    if not names:
        raise ValueError("a DAG needs at least one node")

    parent_sets = {n: set() for n in names}
    child_sets = {n: set() for n in names}
    for child, parent in edges:
        if child not in names:
            raise UnknownNode(child, context="edge child")
        if parent not in names:
            raise UnknownNode(parent, context="edge parent")
        if child == parent:
            raise CycleDetected([child, child])
        parent_sets[child].add(parent)
        child_sets[parent].add(child)

    _ensure_acyclic(names, parent_sets, child_sets)

    parents = {n: tuple(sorted(parent_sets[n])) for n in names}
    children = {n: tuple(sorted(child_sets[n])) for n in names}
    levels = _compute_levels(names, parents, children)
    return AbstractionDag(names, parents, children, levels)


def _ensure_acyclic(names, parent_sets, child_sets):
    # Kahn's algorithm ordering children before parents; leftovers hold a cycle.
    pending = {n: len(child_sets[n]) for n in names}
    queue = deque(n for n, deg in pending.items() if deg == 0)
    processed = 0
    while queue:
        node = queue.popleft()
        processed += 1
        for parent in parent_sets[node]:
            pending[parent] -= 1
            if pending[parent] == 0:
                queue.append(parent)
    if processed == len(names):
        return
    remaining = {n for n, deg in pending.items() if deg > 0}
    # walk child edges inside the remainder until a node repeats
    walk = [sorted(remaining)[0]]
    positions = {walk[0]: 0}
    while True:
        nxt = min(c for c in child_sets[walk[-1]] if c in remaining)
        if nxt in positions:
            cycle = walk[positions[nxt]:] + [nxt]
            raise CycleDetected(list(reversed(cycle)))
        positions[nxt] = len(walk)
        walk.append(nxt)


def _compute_levels(names, parents, children):
    # multi-source BFS upward from the leaves; first visit = shortest path
    levels = {}
    queue = deque()
    for node in names:
        if not children[node]:
            levels[node] = 1
            queue.append(node)
    while queue:
        node = queue.popleft()
        for parent in parents[node]:
            if parent not in levels:
                levels[parent] = levels[node] + 1
                queue.append(parent)
    return levels

"""Independent brute-force oracles and random-structure generators.

Everything here works directly on raw (nodes, edges) lists and never calls
into the package's graph machinery, so oracle results stay independent of the
code paths they are used to check.
"""

import math


def reachable(start, adjacency):
    """All nodes reachable from start by repeatedly following adjacency."""
    seen = set()
    frontier = [start]
    while frontier:
        node = frontier.pop()
        for nxt in adjacency.get(node, ()):
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return seen


def brute_force_descendants(node_ids, edges, node):
    down = {}
    for child, parent in edges:
        down.setdefault(parent, []).append(child)
    return reachable(node, down)


def brute_force_ancestors(node_ids, edges, node):
    up = {}
    for child, parent in edges:
        up.setdefault(child, []).append(parent)
    return reachable(node, up)


def brute_force_aggregates(node_ids, edges, values):
    """Descendant-closure sum for every node: sum of values over {n} + descendants."""
    out = {}
    for node in node_ids:
        closure = {node} | brute_force_descendants(node_ids, edges, node)
        total = sum(values.get(member, 0.0) for member in closure)
        if total != 0:
            out[node] = total
    return out


def brute_force_levels(node_ids, edges, max_hops=None):
    """Level via exhaustive shortest-path search from each node down to a leaf."""
    down = {}
    for child, parent in edges:
        down.setdefault(parent, []).append(child)
    levels = {}
    for node in node_ids:
        # BFS downward until a node with no children appears
        depth = 0
        frontier = {node}
        seen = set()
        while True:
            if any(not down.get(n) for n in frontier):
                levels[node] = depth + 1
                break
            depth += 1
            nxt = set()
            for n in frontier:
                for child in down.get(n, ()):
                    if child not in seen:
                        seen.add(child)
                        nxt.add(child)
            frontier = nxt
            if max_hops is not None and depth > max_hops:
                raise RuntimeError("no leaf found; graph is not a DAG")
    return levels


def entropy_direct(values, base=2.0):
    """Plain -sum(p log p) over a normalized copy of values."""
    total = sum(values)
    if total <= 0:
        return 0.0
    acc = 0.0
    for v in values:
        if v > 0:
            p = v / total
            acc -= p * math.log(p, base)
    return acc


def random_dag(rng, max_nodes=30, parent_chance=0.4):
    """Random DAG: node i may take parents among nodes with larger index."""
    n = rng.randint(1, max_nodes)
    node_ids = [f"n{i:02d}" for i in range(n)]
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < parent_chance / max(1, (j - i)):
                edges.append((node_ids[i], node_ids[j]))
    return node_ids, edges


def random_tree(rng, max_nodes=30):
    """Random tree: every node after the first gets exactly one earlier parent."""
    n = rng.randint(1, max_nodes)
    node_ids = [f"t{i:02d}" for i in range(n)]
    edges = []
    for i in range(1, n):
        parent = node_ids[rng.randrange(i)]
        edges.append((node_ids[i], parent))
    return node_ids, edges


def random_evidence(rng, node_ids, max_support=None):
    """Sparse node -> value map over a random subset of nodes."""
    count = rng.randint(1, max_support or max(1, len(node_ids) // 2))
    chosen = rng.sample(node_ids, min(count, len(node_ids)))
    return {node: rng.random() for node in chosen}

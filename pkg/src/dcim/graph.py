"""Directed graphs: edge-list I/O, random generation, dense-subgraph
extraction, and reachability utilities."""

from __future__ import annotations

from collections import deque
from typing import Iterable, Mapping

import numpy as np

__all__ = [
    "DirectedGraph",
    "EdgeListError",
    "load_edge_list",
    "dump_edge_list",
    "generate_erdos_renyi",
    "extract_dense_subgraph",
    "write_relabel_map",
    "reachable_set",
    "vertices_on_paths",
    "max_reach",
]


class EdgeListError(ValueError):
    """Malformed edge-list input; carries the offending 1-based line number."""

    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class DirectedGraph:
    """Immutable directed graph with per-node sorted in/out neighbor lists.

    Edges are deduplicated; self-loops are rejected. Node ids are dense
    integers in [0, num_nodes).
    """

    __slots__ = ("num_nodes", "edges", "in_neighbors", "out_neighbors")

    def __init__(self, num_nodes: int, edges: Iterable[tuple[int, int]]):
        if num_nodes < 0:
            raise ValueError("num_nodes must be non-negative")
        seen: set[tuple[int, int]] = set()
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop ({u},{u}) not allowed")
            if not (0 <= u < num_nodes and 0 <= v < num_nodes):
                raise ValueError(f"edge ({u},{v}) out of range for n={num_nodes}")
            seen.add((u, v))
        self.num_nodes = num_nodes
        self.edges: list[tuple[int, int]] = sorted(seen)
        ins: list[list[int]] = [[] for _ in range(num_nodes)]
        outs: list[list[int]] = [[] for _ in range(num_nodes)]
        for u, v in self.edges:
            outs[u].append(v)
            ins[v].append(u)
        for lst in ins:
            lst.sort()
        # outs already sorted because self.edges is sorted by (u, v)
        self.in_neighbors: list[list[int]] = ins
        self.out_neighbors: list[list[int]] = outs

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def in_degree(self, v: int) -> int:
        return len(self.in_neighbors[v])

    def total_in_degree(self) -> int:
        """Sum of in-degrees; equals the edge count and the number of
        activation-probability slots."""
        return len(self.edges)

    def adjacency_matrix(self) -> np.ndarray:
        """Dense 0/1 matrix A with A[u, v] = 1 iff edge (u, v) exists."""
        a = np.zeros((self.num_nodes, self.num_nodes), dtype=np.uint8)
        for u, v in self.edges:
            a[u, v] = 1
        return a

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, DirectedGraph)
            and self.num_nodes == other.num_nodes
            and self.edges == other.edges
        )

    def __repr__(self) -> str:
        return f"DirectedGraph(n={self.num_nodes}, m={self.num_edges})"


_NODES_HEADER = "# nodes"


def load_edge_list(text: str, num_nodes: int | None = None) -> DirectedGraph:
    """Parse a whitespace-separated edge list ("u v" per line).

    Lines starting with '#' are comments, except a "# nodes <n>" header which
    pins the node count. Without a header (or explicit num_nodes) the count is
    1 + max id. Duplicate edges are dropped; self-loops are an error.
    """
    edges: list[tuple[int, int]] = []
    max_id = -1
    declared = num_nodes
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if line.lower().startswith(_NODES_HEADER) and declared is None:
                tail = line[len(_NODES_HEADER):].strip(" :=")
                try:
                    declared = int(tail)
                except ValueError:
                    raise EdgeListError(f"bad node-count header {line!r}", lineno)
            continue
        parts = line.split()
        if len(parts) != 2:
            raise EdgeListError(f"expected two ids, got {line!r}", lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise EdgeListError(f"non-integer id in {line!r}", lineno)
        if u < 0 or v < 0:
            raise EdgeListError(f"negative id in {line!r}", lineno)
        if u == v:
            raise EdgeListError(f"self-loop on node {u}", lineno)
        edges.append((u, v))
        max_id = max(max_id, u, v)
    n = declared if declared is not None else max_id + 1
    if max_id >= n:
        raise EdgeListError(f"id {max_id} exceeds declared node count {n}")
    return DirectedGraph(n, edges)


def dump_edge_list(g: DirectedGraph) -> str:
    """Serialize with a node-count header so isolated nodes survive a round trip."""
    lines = [f"{_NODES_HEADER} {g.num_nodes}"]
    lines.extend(f"{u} {v}" for u, v in g.edges)
    return "\n".join(lines) + "\n"


def generate_erdos_renyi(n: int, edge_prob: float, rng: np.random.Generator) -> DirectedGraph:
    """Directed G(n, p): each ordered pair (u, v), u != v, kept independently
    with probability edge_prob. Bit-identical for a given generator state."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 <= edge_prob <= 1.0:
        raise ValueError("edge_prob must be in [0, 1]")
    mask = rng.random((n, n)) < edge_prob
    np.fill_diagonal(mask, False)
    us, vs = np.nonzero(mask)
    return DirectedGraph(n, zip(us.tolist(), vs.tolist()))


def _weak_components(num_nodes: int, edges: list[tuple[int, int]],
                     nodes: set[int]) -> list[set[int]]:
    adj: dict[int, list[int]] = {v: [] for v in nodes}
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    comps: list[set[int]] = []
    unseen = set(nodes)
    while unseen:
        start = unseen.pop()
        comp = {start}
        queue = deque([start])
        while queue:
            x = queue.popleft()
            for y in adj[x]:
                if y in unseen:
                    unseen.discard(y)
                    comp.add(y)
                    queue.append(y)
        comps.append(comp)
    return comps


def extract_dense_subgraph(
    g: DirectedGraph,
    degree_lo: int,
    degree_hi: int,
    num_pivots: int,
    rng: np.random.Generator,
) -> tuple[DirectedGraph, dict[int, int], set[int]]:
    """Pivot-based dense subgraph extraction.

    Filters nodes whose total degree (in + out) lies in [degree_lo, degree_hi],
    uniformly samples num_pivots of them, keeps every edge incident to a pivot,
    and returns the largest weakly connected component of the result with ids
    relabeled densely. Also returns the old->new relabeling map and the pivot
    set (old ids).

    Component-size ties break toward the component containing the smallest
    old id.
    """
    if degree_lo > degree_hi:
        raise ValueError("degree_lo must be <= degree_hi")
    if num_pivots < 1:
        raise ValueError("num_pivots must be >= 1")
    deg = [len(g.in_neighbors[v]) + len(g.out_neighbors[v]) for v in range(g.num_nodes)]
    qualifying = [v for v in range(g.num_nodes) if degree_lo <= deg[v] <= degree_hi]
    if not qualifying:
        raise ValueError(f"no node has degree in [{degree_lo}, {degree_hi}]")
    if len(qualifying) < num_pivots:
        raise ValueError(
            f"only {len(qualifying)} nodes qualify, need {num_pivots} pivots")
    pivots = set(rng.choice(qualifying, size=num_pivots, replace=False).tolist())
    kept_edges = [(u, v) for u, v in g.edges if u in pivots or v in pivots]
    nodes = set(pivots)
    for u, v in kept_edges:
        nodes.add(u)
        nodes.add(v)
    comps = _weak_components(g.num_nodes, kept_edges, nodes)
    best = max(comps, key=lambda c: (len(c), -min(c)))
    old_ids = sorted(best)
    relabel = {old: new for new, old in enumerate(old_ids)}
    sub_edges = [(relabel[u], relabel[v]) for u, v in kept_edges
                 if u in best and v in best]
    return DirectedGraph(len(old_ids), sub_edges), relabel, pivots


def write_relabel_map(relabel: Mapping[int, int]) -> str:
    """Relabel map file body: one "old_id new_id" pair per line."""
    return "\n".join(f"{old} {new}" for old, new in sorted(relabel.items())) + "\n"


def reachable_set(g: DirectedGraph, seeds: Iterable[int]) -> set[int]:
    """All nodes reachable from the seed set along directed paths (length >= 0)."""
    found = set()
    queue = deque()
    for s in seeds:
        if not 0 <= s < g.num_nodes:
            raise ValueError(f"node {s} out of range")
        if s not in found:
            found.add(s)
            queue.append(s)
    while queue:
        u = queue.popleft()
        for v in g.out_neighbors[u]:
            if v not in found:
                found.add(v)
                queue.append(v)
    return found


def _reverse_reachable(g: DirectedGraph, v: int) -> set[int]:
    found = {v}
    queue = deque([v])
    while queue:
        x = queue.popleft()
        for u in g.in_neighbors[x]:
            if u not in found:
                found.add(u)
                queue.append(u)
    return found


def vertices_on_paths(g: DirectedGraph, seeds: Iterable[int], v: int) -> set[int]:
    """Nodes lying on some directed path from the seed set to v.

    Intersection of {reachable from seeds} and {can reach v}; empty when v is
    unreachable from the seeds.
    """
    if not 0 <= v < g.num_nodes:
        raise ValueError(f"node {v} out of range")
    forward = reachable_set(g, seeds)
    if v not in forward:
        return set()
    return forward & _reverse_reachable(g, v)


def max_reach(g: DirectedGraph) -> int:
    """Largest number of nodes reachable from any single node (self counted)."""
    return max(len(reachable_set(g, [u])) for u in range(g.num_nodes))

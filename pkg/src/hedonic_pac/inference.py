"""Infer forests and paths consistent with labeled connectivity samples.

Positive-only inference is polynomial: a forest connecting every sample
exists iff the maximum-weight spanning forest over pairwise co-occurrence
counts reaches sum(|S| - 1), and that forest is itself a witness. With
negative labels the decision problem is intractable in general, so the
path solver is a pruned exhaustive search and the forest solver a small-n
brute force.
"""
from __future__ import annotations

import time
from collections import Counter
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Literal, Optional, Sequence

from .game import CapacityError, Coalition, InteractionGraph, is_connected


class NoConsistentForestError(ValueError):
    """No forest reproduces the labeled connectivity samples."""


@dataclass(frozen=True)
class ConnectivitySample:
    """A vertex set labeled with its connectivity in some hidden graph."""

    vertices: Coalition
    connected: bool

    def __post_init__(self):
        if not self.vertices:
            raise ValueError("connectivity samples must be nonempty")
        if len(self.vertices) == 1 and not self.connected:
            raise ValueError("singletons are connected in every graph")


def check_consistency(
    g: InteractionGraph, samples: Iterable[ConnectivitySample]
) -> bool:
    """True iff every sample's connectivity in g matches its label."""
    return all(is_connected(g, s.vertices) == s.connected for s in samples)


class _DisjointSet:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, x: int, y: int) -> bool:
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return False
        self.parent[rx] = ry
        return True


def cooccurrence_weights(
    samples: Iterable[ConnectivitySample],
) -> Counter[tuple[int, int]]:
    """Number of connected samples containing each unordered vertex pair."""
    weights: Counter[tuple[int, int]] = Counter()
    for s in samples:
        for u, v in combinations(s.vertices.members, 2):
            weights[(u, v)] += 1
    return weights


def infer_forest(
    samples: Sequence[ConnectivitySample], n: int
) -> Optional[InteractionGraph]:
    """Find a forest in which every (connected-labeled) sample is connected.

    Builds the co-occurrence graph, takes a maximum-weight spanning forest
    (ties broken lexicographically), and accepts iff its weight equals
    sum(|S| - 1); a final pass re-verifies every sample. Returns None when
    no consistent forest exists.
    """
    for s in samples:
        if not s.connected:
            raise ValueError("infer_forest accepts connected-labeled samples only")
        for v in s.vertices:
            if not 0 <= v < n:
                raise ValueError(f"vertex {v} out of range for n={n}")
    weights = cooccurrence_weights(samples)
    target = sum(len(s.vertices) - 1 for s in samples)
    dsu = _DisjointSet(n)
    chosen = []
    total = 0
    for (u, v), w in sorted(weights.items(), key=lambda kv: (-kv[1], kv[0])):
        if dsu.union(u, v):
            chosen.append((u, v))
            total += w
    if total != target:
        return None
    forest = InteractionGraph.from_edges(n, chosen)
    if not check_consistency(forest, samples):
        return None
    return forest


def _forest_connects(edge_masks: Sequence[int], vertex_mask: int, size: int) -> bool:
    # A forest's induced subgraph is connected iff it has |S| - 1 edges inside.
    inside = 0
    for em in edge_masks:
        if em & vertex_mask == em:
            inside += 1
    return inside == size - 1


def bruteforce_consistent_forest(
    samples: Sequence[ConnectivitySample], n: int
) -> Optional[InteractionGraph]:
    """Exhaustive search over all forests on n vertices (guarded to n <= 7)."""
    if n > 7:
        raise CapacityError(f"forest enumeration guarded to n <= 7, got {n}")
    for s in samples:
        for v in s.vertices:
            if not 0 <= v < n:
                raise ValueError(f"vertex {v} out of range for n={n}")
    checks = [
        (
            sum(1 << v for v in s.vertices),
            len(s.vertices),
            s.connected,
        )
        for s in samples
    ]
    all_edges = list(combinations(range(n), 2))

    def consistent(edge_masks: list[int]) -> bool:
        return all(
            _forest_connects(edge_masks, mask, size) == label
            for mask, size, label in checks
        )

    result: Optional[list[tuple[int, int]]] = None

    def rec(idx: int, dsu_parent: list[int], edges: list[tuple[int, int]]) -> bool:
        nonlocal result
        if idx == len(all_edges):
            if consistent([(1 << u) | (1 << v) for u, v in edges]):
                result = list(edges)
                return True
            return False
        u, v = all_edges[idx]
        dsu = _DisjointSet(n)
        dsu.parent = dsu_parent[:]
        if dsu.union(u, v):
            edges.append((u, v))
            if rec(idx + 1, dsu.parent, edges):
                return True
            edges.pop()
        return rec(idx + 1, dsu_parent, edges)

    rec(0, list(range(n)), [])
    if result is None:
        return None
    return InteractionGraph.from_edges(n, result)


@dataclass(frozen=True)
class PathSearchResult:
    status: Literal["found", "absent", "unknown"]
    ordering: Optional[tuple[int, ...]] = None

    @property
    def found(self) -> bool:
        return self.status == "found"


class _SearchTimeout(Exception):
    pass


def _ordering_consistent(
    positions: Sequence[int], samples: Iterable[ConnectivitySample]
) -> bool:
    # In a path, a vertex set is connected iff its positions are contiguous.
    for s in samples:
        pos = [positions[v] for v in s.vertices]
        contiguous = max(pos) - min(pos) == len(pos) - 1
        if contiguous != s.connected:
            return False
    return True


def backtrack_consistent_path(
    samples: Sequence[ConnectivitySample],
    n: int,
    timeout_secs: Optional[float] = None,
) -> PathSearchResult:
    """Search for a Hamiltonian ordering whose path satisfies every label.

    Size-2 labels become forbidden pairs / forced edges, size-3 labels are
    checked incrementally against position contiguity, and size-(n-1)
    labels pin which vertices may be endpoints. Exhausting the pruned
    search certifies absence; hitting the time budget yields "unknown".
    """
    if n <= 0:
        raise ValueError("n must be positive")
    if n == 1:
        ordering = (0,)
        ok = _ordering_consistent([0], samples)
        return PathSearchResult("found", ordering) if ok else PathSearchResult("absent")

    forbidden: set[tuple[int, int]] = set()
    forced: list[set[int]] = [set() for _ in range(n)]
    required_endpoints: set[int] = set()
    forbidden_endpoints: set[int] = set()
    triples: list[tuple[int, ...]] = []
    triple_labels: list[bool] = []
    general: list[ConnectivitySample] = []

    for s in samples:
        for v in s.vertices:
            if not 0 <= v < n:
                raise ValueError(f"vertex {v} out of range for n={n}")
        size = len(s.vertices)
        if size == 1:
            continue
        if size == n and not s.connected:
            return PathSearchResult("absent")
        if size == 2:
            u, v = s.vertices.members
            if s.connected:
                forced[u].add(v)
                forced[v].add(u)
            else:
                forbidden.add((u, v))
        elif size == n - 1 and n >= 3:
            (missing,) = set(range(n)) - set(s.vertices.members)
            if s.connected:
                required_endpoints.add(missing)
            else:
                forbidden_endpoints.add(missing)
        elif size == 3:
            triples.append(s.vertices.members)
            triple_labels.append(s.connected)
        else:
            general.append(s)

    if any(len(f) > 2 for f in forced):
        return PathSearchResult("absent")
    if len(required_endpoints) > 2:
        return PathSearchResult("absent")
    if any((min(u, v), max(u, v)) in forbidden for u in range(n) for v in forced[u]):
        return PathSearchResult("absent")

    allowed: list[list[int]] = [
        [v for v in range(n) if v != u and (min(u, v), max(u, v)) not in forbidden]
        for u in range(n)
    ]
    allowed_sets = [set(a) for a in allowed]
    triples_at: list[list[int]] = [[] for _ in range(n)]
    for t, members in enumerate(triples):
        for v in members:
            triples_at[v].append(t)

    # A vertex that may touch at most one other vertex can only be an endpoint.
    endpoint_only = set(required_endpoints)
    endpoint_only.update(v for v in range(n) if len(allowed[v]) <= 1)
    if len(endpoint_only) > 2 or endpoint_only & forbidden_endpoints:
        return PathSearchResult("absent")

    deadline = None if timeout_secs is None else time.monotonic() + timeout_secs
    positions = [-1] * n
    path: list[int] = []
    unplaced = set(range(n))
    nodes_visited = 0

    def triple_ok(t: int) -> bool:
        placed = sorted(p for v in triples[t] if (p := positions[v]) >= 0)
        if len(placed) < 2:
            return True
        if len(placed) == 3:
            return (placed[2] - placed[0] == 2) == triple_labels[t]
        lo, hi = placed
        if not triple_labels[t]:
            return True
        # Positive triple: two placed members must sit within distance 2,
        # and a gap of exactly 2 must already hold the third member.
        if hi - lo > 2:
            return False
        if hi - lo == 2 and path[lo + 1] not in triples[t]:
            return False
        return True

    def region_ok(end: int) -> bool:
        """The rest of the path is a Hamiltonian path on unplaced + {end}
        starting at end: that region must be connected, and only the final
        endpoint may be left with a single available neighbor."""
        region = unplaced | {end}
        stack, seen = [end], {end}
        while stack:
            v = stack.pop()
            for w in allowed_sets[v]:
                if w in region and w not in seen:
                    seen.add(w)
                    stack.append(w)
        if len(seen) != len(region):
            return False
        must_final = endpoint_only & unplaced
        finals = set()
        for v in unplaced:
            degree = sum(1 for w in allowed_sets[v] if w in region)
            if degree == 0:
                return False
            if degree == 1:
                if v in forbidden_endpoints:
                    return False
                finals.add(v)
        if must_final:
            return not (finals - must_final)
        return len(finals) <= 1

    def extend(pos: int) -> Optional[tuple[int, ...]]:
        nonlocal nodes_visited
        nodes_visited += 1
        if deadline is not None and nodes_visited % 256 == 0:
            if time.monotonic() > deadline:
                raise _SearchTimeout
        if pos == n:
            last = path[-1]
            if forced[last] - {path[-2]}:
                return None
            if last in forbidden_endpoints:
                return None
            if general and not _ordering_consistent(positions, general):
                return None
            return tuple(path)
        prev = path[-1]
        # Any forced edge at prev that is not yet realized pins the next vertex.
        pending = forced[prev] - ({path[-2]} if len(path) >= 2 else set())
        if len(pending) > 1:
            return None
        if pending:
            candidates = sorted(pending)
        else:
            # Fewest-options-first keeps the search on tightly constrained
            # vertices and fails fast elsewhere.
            open_neighbors = [v for v in allowed[prev] if positions[v] < 0]
            open_neighbors.sort(
                key=lambda v: (sum(1 for w in allowed_sets[v] if w in unplaced), v)
            )
            candidates = open_neighbors
        for v in candidates:
            if positions[v] >= 0:
                continue
            if pending and v not in allowed_sets[prev]:
                continue
            if v in endpoint_only and pos != n - 1:
                continue
            positions[v] = pos
            path.append(v)
            unplaced.discard(v)
            if all(triple_ok(t) for t in triples_at[v]) and (
                pos == n - 1 or region_ok(v)
            ):
                found = extend(pos + 1)
                if found is not None:
                    return found
            unplaced.add(v)
            path.pop()
            positions[v] = -1
        return None

    starts = sorted(endpoint_only)[:1] if endpoint_only else list(range(n))
    try:
        for start in starts:
            if start in forbidden_endpoints:
                continue
            positions[start] = 0
            path.append(start)
            unplaced.discard(start)
            if all(triple_ok(t) for t in triples_at[start]):
                found = extend(1)
                if found is not None:
                    return PathSearchResult("found", found)
            unplaced.add(start)
            path.pop()
            positions[start] = -1
    except _SearchTimeout:
        return PathSearchResult("unknown")
    return PathSearchResult("absent")

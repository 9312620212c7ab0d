"""Core types and exact semantics of graph-restricted hedonic games.

Players are dense 0-based ids. A coalition is feasible when it induces a
connected subgraph of the interaction network; utilities follow the hedonic
contract: the singleton is worth exactly 0 and any disconnected coalition is
strictly negative.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Optional, Protocol


class CapacityError(RuntimeError):
    """An exact computation was asked to exceed its size guard."""


def stable_u64(*parts) -> int:
    """Deterministic 64-bit hash of a tuple of ints/strings (stable across runs)."""
    data = "\x1f".join(str(p) for p in parts).encode()
    return int.from_bytes(hashlib.blake2b(data, digest_size=8).digest(), "big")


@dataclass(frozen=True)
class Coalition:
    """Canonical (sorted, duplicate-free) tuple of player ids.

    The empty coalition is a distinguished placeholder used only by
    distributions; it never appears inside a partition and never blocks.
    """

    members: tuple[int, ...] = ()

    def __post_init__(self):
        m = self.members
        if any(m[k] >= m[k + 1] for k in range(len(m) - 1)):
            raise ValueError(f"coalition members must be sorted and distinct: {m}")
        if m and m[0] < 0:
            raise ValueError(f"negative player id in coalition: {m}")

    @classmethod
    def of(cls, members: Iterable[int]) -> "Coalition":
        return cls(tuple(sorted(set(members))))

    def __iter__(self) -> Iterator[int]:
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, player: int) -> bool:
        return player in self.members

    def __bool__(self) -> bool:
        return bool(self.members)


EMPTY_COALITION = Coalition()


@dataclass(frozen=True)
class InteractionGraph:
    """Undirected graph over players 0..n-1; no self-loops, no duplicates."""

    n: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("player count must be nonnegative")
        for u, v in self.edges:
            if not (0 <= u < v < self.n):
                raise ValueError(f"bad edge ({u}, {v}) for n={self.n}")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Iterable[int]]) -> "InteractionGraph":
        normalized = set()
        for e in edges:
            u, v = e
            if u == v:
                raise ValueError(f"self-loop at {u}")
            normalized.add((min(u, v), max(u, v)))
        return cls(n, frozenset(normalized))

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return tuple(tuple(sorted(a)) for a in adj)

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adjacency[v]

    def is_forest(self) -> bool:
        parent = list(range(self.n))

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for u, v in self.edges:
            ru, rv = find(u), find(v)
            if ru == rv:
                return False
            parent[ru] = rv
        return True

    def components(self) -> list[tuple[int, ...]]:
        seen = [False] * self.n
        out = []
        for start in range(self.n):
            if seen[start]:
                continue
            stack, comp = [start], []
            seen[start] = True
            while stack:
                v = stack.pop()
                comp.append(v)
                for w in self.adjacency[v]:
                    if not seen[w]:
                        seen[w] = True
                        stack.append(w)
            out.append(tuple(sorted(comp)))
        return out


def is_connected(g: InteractionGraph, s: Coalition) -> bool:
    """True iff s induces a connected subgraph of g.

    Singletons are connected; the empty placeholder counts as connected
    (it can never block anything).
    """
    if not s:
        return True
    members = s.members
    for v in members:
        if not 0 <= v < g.n:
            raise ValueError(f"player {v} out of range for n={g.n}")
    if len(members) == 1:
        return True
    inside = set(members)
    stack = [members[0]]
    seen = {members[0]}
    while stack:
        v = stack.pop()
        for w in g.adjacency[v]:
            if w in inside and w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == len(inside)


class UtilityOracle(Protocol):
    """Per-player valuation over coalitions containing that player."""

    graph: InteractionGraph

    def value(self, player: int, coalition: Coalition) -> float:
        ...


def _check_query(player: int, coalition: Coalition) -> None:
    if not coalition:
        raise ValueError("the empty coalition has no utilities")
    if player not in coalition:
        raise ValueError(f"player {player} not in coalition {coalition.members}")


class TableOracle:
    """Explicit utility table with defaults for unlisted coalitions.

    Explicit values for coalitions that are disconnected in the reference
    graph must be negative, as must `default_disconnected`; singletons are
    pinned to 0.
    """

    def __init__(
        self,
        graph: InteractionGraph,
        entries: Mapping[Coalition, Mapping[int, float]],
        default_connected: float = 0.0,
        default_disconnected: float = -1.0,
    ):
        if default_disconnected >= 0:
            raise ValueError("default_disconnected must be negative")
        table: dict[Coalition, dict[int, float]] = {}
        for coalition, values in entries.items():
            connected = is_connected(graph, coalition)
            for player, value in values.items():
                if player not in coalition:
                    raise ValueError(
                        f"value listed for player {player} outside coalition {coalition.members}"
                    )
                if len(coalition) == 1 and value != 0.0:
                    raise ValueError("singleton utilities are pinned to 0")
                if not connected and value >= 0:
                    raise ValueError(
                        f"disconnected coalition {coalition.members} must have negative value"
                    )
            table[coalition] = dict(values)
        self.graph = graph
        self.entries = table
        self.default_connected = default_connected
        self.default_disconnected = default_disconnected

    def value(self, player: int, coalition: Coalition) -> float:
        _check_query(player, coalition)
        if len(coalition) == 1:
            return 0.0
        listed = self.entries.get(coalition)
        if listed is not None and player in listed:
            return listed[player]
        if is_connected(self.graph, coalition):
            return self.default_connected
        return self.default_disconnected


class HashUtilityOracle:
    """Seeded pseudo-random valuation satisfying the hedonic contract.

    Connected non-singleton coalitions get a keyed-hash value in (0, 1);
    disconnected ones get -1 minus such a value. Repeated queries are
    identical and the oracle is stateless.
    """

    def __init__(self, graph: InteractionGraph, seed: int):
        self.graph = graph
        self.seed = seed

    def value(self, player: int, coalition: Coalition) -> float:
        _check_query(player, coalition)
        if len(coalition) == 1:
            return 0.0
        u = (stable_u64("util", self.seed, player, *coalition.members) >> 11) + 0.5
        u /= float(1 << 53)
        if is_connected(self.graph, coalition):
            return u
        return -1.0 - u


def value_vector(oracle: UtilityOracle, coalition: Coalition) -> dict[int, float]:
    return {i: oracle.value(i, coalition) for i in coalition}


@dataclass(frozen=True)
class LabeledSample:
    """A sampled coalition together with its members' utilities."""

    coalition: Coalition
    values: Mapping[int, float]

    def __post_init__(self):
        if set(self.values) != set(self.coalition.members):
            raise ValueError("sample values must be keyed exactly by coalition members")


@dataclass(frozen=True)
class CoalitionStructure:
    """A partition of the players into disjoint coalitions."""

    blocks: tuple[Coalition, ...]

    @classmethod
    def from_blocks(cls, blocks: Iterable[Iterable[int]]) -> "CoalitionStructure":
        coalitions = tuple(
            sorted(
                (b if isinstance(b, Coalition) else Coalition.of(b) for b in blocks),
                key=lambda c: c.members,
            )
        )
        n = sum(len(b) for b in coalitions)
        covered = set()
        for b in coalitions:
            if not b:
                raise ValueError("partition blocks must be nonempty")
            covered.update(b.members)
        if covered != set(range(n)):
            raise ValueError(f"blocks do not partition 0..{n - 1}")
        return cls(coalitions)

    @cached_property
    def _index(self) -> dict[int, int]:
        idx = {}
        for b, block in enumerate(self.blocks):
            for i in block:
                idx[i] = b
        return idx

    @property
    def n(self) -> int:
        return len(self._index)

    def block_of(self, player: int) -> Coalition:
        return self.blocks[self._index[player]]

    def __iter__(self) -> Iterator[Coalition]:
        return iter(self.blocks)


def singleton_partition(n: int) -> CoalitionStructure:
    return CoalitionStructure.from_blocks([i] for i in range(n))


def strongly_blocks(oracle: UtilityOracle, s: Coalition, pi: CoalitionStructure) -> bool:
    """True iff every member of s strictly prefers s to their current block."""
    if not s:
        return False
    return all(oracle.value(i, s) > oracle.value(i, pi.block_of(i)) for i in s)


def blocking_probability(oracle: UtilityOracle, pi: CoalitionStructure, dist) -> float:
    """Exact probability mass of support coalitions that strongly block pi.

    Requires a finite-support distribution; for generative samplers use
    `empirical_blocking_rate` instead.
    """
    support = getattr(dist, "support", None)
    if support is None:
        raise ValueError(
            "distribution has no finite support; use empirical_blocking_rate"
        )
    return sum(p for coalition, p in support() if strongly_blocks(oracle, coalition, pi))


def enumerate_connected_coalitions(g: InteractionGraph) -> list[Coalition]:
    """All nonempty connected vertex sets of g, ordered by (size, members)."""
    if g.n > 20:
        raise CapacityError(f"n={g.n} too large to enumerate subsets")
    found = []
    for mask in range(1, 1 << g.n):
        members = [v for v in range(g.n) if mask >> v & 1]
        c = Coalition(tuple(members))
        if is_connected(g, c):
            found.append(c)
    found.sort(key=lambda c: (len(c), c.members))
    return found


def enumerate_connected_partitions(g: InteractionGraph) -> Iterator[CoalitionStructure]:
    """Yield every partition of the players into connected coalitions.

    Enumeration is deterministic: the lowest unassigned player is placed
    into candidate blocks ordered by (size, members), so the all-singleton
    partition comes first.
    """
    candidates = enumerate_connected_coalitions(g)

    def rec(unassigned: frozenset[int], acc: list[Coalition]):
        if not unassigned:
            yield CoalitionStructure.from_blocks(list(acc))
            return
        low = min(unassigned)
        for c in candidates:
            if low in c and unassigned.issuperset(c.members):
                acc.append(c)
                yield from rec(unassigned - set(c.members), acc)
                acc.pop()

    yield from rec(frozenset(range(g.n)), [])


def find_core_bruteforce(
    g: InteractionGraph, oracle: UtilityOracle
) -> Optional[CoalitionStructure]:
    """Exhaustively search for a partition not strongly blocked by any
    connected coalition; None certifies an empty core. Guarded to n <= 12."""
    if g.n > 12:
        raise CapacityError(f"core enumeration guarded to n <= 12, got {g.n}")
    coalitions = enumerate_connected_coalitions(g)
    for pi in enumerate_connected_partitions(g):
        if not any(strongly_blocks(oracle, s, pi) for s in coalitions):
            return pi
    return None

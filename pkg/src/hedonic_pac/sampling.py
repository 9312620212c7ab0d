"""Coalition distributions, sample generation, and reproducible random games.

Every draw is a pure function of (seed, index), so independent workers can
partition the index space without coordination.
"""
from __future__ import annotations

import heapq
import random
from bisect import bisect_left
from dataclasses import dataclass, field
from itertools import accumulate
from typing import Iterable, Optional, Sequence

from .game import (
    Coalition,
    HashUtilityOracle,
    InteractionGraph,
    LabeledSample,
    UtilityOracle,
    stable_u64,
    value_vector,
)

PROBABILITY_TOLERANCE = 1e-9


class FiniteSupportDistribution:
    """Explicit distribution over coalitions; duplicates are merged."""

    def __init__(self, coalitions: Sequence[Coalition], probabilities: Sequence[float]):
        if len(coalitions) != len(probabilities):
            raise ValueError("coalitions and probabilities must have equal length")
        if not coalitions:
            raise ValueError("support must be nonempty")
        merged: dict[Coalition, float] = {}
        for c, p in zip(coalitions, probabilities):
            if p < 0:
                raise ValueError("probabilities must be nonnegative")
            merged[c] = merged.get(c, 0.0) + p
        total = sum(merged.values())
        if abs(total - 1.0) > PROBABILITY_TOLERANCE:
            raise ValueError(f"probabilities sum to {total}, expected 1")
        items = sorted(merged.items(), key=lambda kv: kv[0].members)
        self.coalitions = tuple(c for c, _ in items)
        self.probabilities = tuple(p for _, p in items)
        self._cumulative = list(accumulate(self.probabilities))

    @classmethod
    def uniform(cls, coalitions: Sequence[Coalition]) -> "FiniteSupportDistribution":
        p = 1.0 / len(coalitions)
        return cls(coalitions, [p] * len(coalitions))

    def support(self) -> tuple[tuple[Coalition, float], ...]:
        return tuple(zip(self.coalitions, self.probabilities))

    def draw_one(self, seed: int, index: int) -> Coalition:
        u = stable_u64("finite-draw", seed, index) / float(1 << 64)
        u *= self._cumulative[-1]
        return self.coalitions[bisect_left(self._cumulative, u)]

    def draw(self, seed: int, count: int) -> list[Coalition]:
        if count < 0:
            raise ValueError("count must be nonnegative")
        return [self.draw_one(seed, k) for k in range(count)]


class GrowSubtreeSampler:
    """Generative distribution over connected coalitions of a graph.

    Each draw picks a uniform start vertex and repeatedly adds a uniform
    random neighbor of the current set, stopping with probability
    `stop_prob` after each addition (including the start), or when the
    component is exhausted. Every draw is connected by construction.
    """

    def __init__(self, graph: InteractionGraph, salt: int = 0, stop_prob: float = 0.3):
        if graph.n < 1:
            raise ValueError("graph must have at least one vertex")
        if not 0.0 < stop_prob <= 1.0:
            raise ValueError("stop_prob must be in (0, 1]")
        self.graph = graph
        self.salt = salt
        self.stop_prob = stop_prob

    def draw_one(self, seed: int, index: int) -> Coalition:
        rng = random.Random(stable_u64("grow", self.salt, seed, index))
        current = {rng.randrange(self.graph.n)}
        frontier: set[int] = set()
        for v in current:
            frontier.update(self.graph.neighbors(v))
        while True:
            if rng.random() < self.stop_prob or not frontier:
                return Coalition.of(current)
            picked = rng.choice(sorted(frontier))
            current.add(picked)
            frontier.update(w for w in self.graph.neighbors(picked) if w not in current)
            frontier.discard(picked)


def random_connected_sampler(
    g: InteractionGraph, seed: int, stop_prob: float = 0.3
) -> GrowSubtreeSampler:
    return GrowSubtreeSampler(g, salt=seed, stop_prob=stop_prob)


def draw(dist, seed: int, count: int) -> list[Coalition]:
    """Draw `count` i.i.d. coalitions; deterministic per (seed, index)."""
    if count < 0:
        raise ValueError("count must be nonnegative")
    return [dist.draw_one(seed, k) for k in range(count)]


def labeled_samples(
    oracle: UtilityOracle, coalitions: Iterable[Coalition]
) -> list[LabeledSample]:
    return [LabeledSample(c, value_vector(oracle, c)) for c in coalitions]


def random_tree(n: int, seed: int) -> InteractionGraph:
    """Uniform random labeled tree on n vertices via a Prufer sequence."""
    if n < 1:
        raise ValueError("n must be positive")
    if n == 1:
        return InteractionGraph.from_edges(1, [])
    if n == 2:
        return InteractionGraph.from_edges(2, [(0, 1)])
    rng = random.Random(stable_u64("tree", seed))
    sequence = [rng.randrange(n) for _ in range(n - 2)]
    degree = [1] * n
    for v in sequence:
        degree[v] += 1
    edges = []
    leaves = [v for v in range(n) if degree[v] == 1]
    heapq.heapify(leaves)
    for v in sequence:
        leaf = heapq.heappop(leaves)
        edges.append((leaf, v))
        degree[v] -= 1
        if degree[v] == 1:
            heapq.heappush(leaves, v)
    u, w = heapq.heappop(leaves), heapq.heappop(leaves)
    edges.append((u, w))
    return InteractionGraph.from_edges(n, edges)


def random_forest(n: int, seed: int, keep_prob: float = 0.5) -> InteractionGraph:
    """Random forest: a random tree with each edge kept independently."""
    tree = random_tree(n, seed)
    rng = random.Random(stable_u64("forest", seed))
    kept = [e for e in sorted(tree.edges) if rng.random() < keep_prob]
    return InteractionGraph.from_edges(n, kept)


@dataclass(frozen=True)
class RandomGameSpec:
    """Reproducible recipe for a random hedonic graph game.

    The same spec always builds the identical game; hash-based utilities
    satisfy the hedonic contract by construction.
    """

    n: int
    seed: int
    graph_kind: str = "tree"  # tree | forest | explicit
    graph: Optional[InteractionGraph] = field(default=None)

    def build_graph(self) -> InteractionGraph:
        if self.graph_kind == "explicit":
            if self.graph is None:
                raise ValueError("explicit graph_kind requires a graph")
            return self.graph
        if self.graph_kind == "tree":
            return random_tree(self.n, self.seed)
        if self.graph_kind == "forest":
            return random_forest(self.n, self.seed)
        raise ValueError(f"unknown graph_kind {self.graph_kind!r}")

    def build(self) -> tuple[InteractionGraph, HashUtilityOracle]:
        graph = self.build_graph()
        return graph, HashUtilityOracle(graph, seed=stable_u64("game", self.seed))

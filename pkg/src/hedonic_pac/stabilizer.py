"""Sample-driven stabilization of hedonic games on forests.

The stabilizer roots each tree, walks the nodes bottom-up, and keeps for
every node i the best sampled coalition inside i's subtree that all other
members weakly prefer to their own kept coalition. Stitching those kept
coalitions together top-down yields a partition whose blocking probability
under the sampling distribution is below epsilon with confidence 1 - delta,
provided the sample pool is large enough.

Only comparisons between observed utilities are used, so the output is
invariant under per-player order-preserving rescalings that fix 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Optional, Sequence

from .game import (
    Coalition,
    CoalitionStructure,
    EMPTY_COALITION,
    InteractionGraph,
    LabeledSample,
    UtilityOracle,
    is_connected,
    strongly_blocks,
)
from .inference import ConnectivitySample, NoConsistentForestError, infer_forest


class NotAForestError(ValueError):
    """The interaction graph contains a cycle."""


class InsufficientSamplesError(ValueError):
    def __init__(self, required: int, got: int):
        super().__init__(f"need at least {required} samples, got {got}")
        self.required = required
        self.got = got


@dataclass(frozen=True)
class PacParams:
    epsilon: float
    delta: float

    def __post_init__(self):
        if not 0.0 < self.epsilon <= 1.0:
            raise ValueError(f"epsilon must be in (0, 1], got {self.epsilon}")
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must be in (0, 1), got {self.delta}")

    def halved(self) -> "PacParams":
        return PacParams(self.epsilon / 2.0, self.delta / 2.0)


def required_sample_size(n: int, epsilon: float, delta: float) -> int:
    """ceil((n/epsilon) * ln(n/delta)); natural log throughout."""
    params = PacParams(epsilon, delta)
    if n < 1:
        raise ValueError("n must be positive")
    return max(1, math.ceil(n / params.epsilon * math.log(n / params.delta)))


def forest_class_sample_size(n: int, epsilon: float, delta: float) -> int:
    """Consistent-learner sample bound for the finite class of n-vertex forests.

    There are at most n^(n-2) * 2^(n-1) forests, which gives
    ceil((1/epsilon) * ((n-2) ln n + (n-1) ln 2 + ln(1/delta))).
    """
    params = PacParams(epsilon, delta)
    if n < 2:
        raise ValueError("n must be at least 2")
    bound = (n - 2) * math.log(n) + (n - 1) * math.log(2) + math.log(1.0 / params.delta)
    return max(1, math.ceil(bound / params.epsilon))


@dataclass(frozen=True)
class RootedForest:
    """A forest with edges oriented away from per-component roots.

    Roots are the smallest ids of their components. A node's height is 0
    for leaves and 1 + the maximum height among its proper descendants
    otherwise.
    """

    graph: InteractionGraph
    parent: tuple[Optional[int], ...]
    roots: tuple[int, ...]
    children: tuple[tuple[int, ...], ...]
    height: tuple[int, ...]

    @cached_property
    def descendants(self) -> tuple[frozenset[int], ...]:
        desc: list[set[int]] = [{i} for i in range(self.graph.n)]
        for i in self.bottom_up_order():
            for c in self.children[i]:
                desc[i] |= desc[c]
        return tuple(frozenset(d) for d in desc)

    def bottom_up_order(self) -> list[int]:
        return sorted(range(self.graph.n), key=lambda i: (self.height[i], i))

    def coalition_children(self, s: Coalition) -> list[int]:
        """Nodes outside s whose parent belongs to s."""
        inside = set(s.members)
        out = []
        for v in inside:
            for c in self.children[v]:
                if c not in inside:
                    out.append(c)
        return sorted(out)

    def apex(self, s: Coalition) -> int:
        """The unique highest node of a connected coalition."""
        return max(s.members, key=lambda v: self.height[v])


def root_forest(g: InteractionGraph) -> RootedForest:
    """Orient a forest away from the smallest id of each component."""
    if not g.is_forest():
        raise NotAForestError("interaction graph contains a cycle")
    parent: list[Optional[int]] = [None] * g.n
    children: list[list[int]] = [[] for _ in range(g.n)]
    roots = []
    visited = [False] * g.n
    order: list[int] = []
    for start in range(g.n):
        if visited[start]:
            continue
        roots.append(start)
        visited[start] = True
        stack = [start]
        while stack:
            v = stack.pop()
            order.append(v)
            for w in g.neighbors(v):
                if not visited[w]:
                    visited[w] = True
                    parent[w] = v
                    children[v].append(w)
                    stack.append(w)
    height = [0] * g.n
    for v in reversed(order):
        if children[v]:
            height[v] = 1 + max(height[c] for c in children[v])
    return RootedForest(
        graph=g,
        parent=tuple(parent),
        roots=tuple(roots),
        children=tuple(tuple(sorted(c)) for c in children),
        height=tuple(height),
    )


@dataclass
class StabilizerState:
    """Per-node bookkeeping while the stabilizer runs."""

    forest: RootedForest
    samples: tuple[LabeledSample, ...]
    guaranteed: dict[int, Coalition] = field(default_factory=dict)
    guaranteed_value: dict[int, float] = field(default_factory=dict)
    partial: dict[int, tuple[Coalition, ...]] = field(default_factory=dict)


def _admissible(state: StabilizerState, node: int, sample: LabeledSample) -> bool:
    s = sample.coalition
    if node not in s:
        return False
    desc = state.forest.descendants[node]
    if not desc.issuperset(s.members):
        return False
    if not is_connected(state.forest.graph, s):
        return False
    return all(
        sample.values[j] >= state.guaranteed_value[j] for j in s if j != node
    )


def candidate_set(
    node: int, state: StabilizerState, samples: Iterable[LabeledSample]
) -> set[Coalition]:
    """Sampled coalitions acceptable as node's kept coalition, plus its singleton.

    A sample qualifies when it is connected, lies inside node's subtree,
    contains node, and every other member values it at least as much as
    their own kept coalition."""
    out = {Coalition((node,))}
    for sample in samples:
        if _admissible(state, node, sample):
            out.add(sample.coalition)
    return out


def _process_node(state: StabilizerState, node: int) -> None:
    best = Coalition((node,))
    best_value = 0.0
    for sample in state.samples:
        if _admissible(state, node, sample) and sample.values[node] > best_value:
            best = sample.coalition
            best_value = sample.values[node]
    state.guaranteed[node] = best
    state.guaranteed_value[node] = best_value
    blocks = (best,)
    for child in state.forest.coalition_children(best):
        blocks += state.partial[child]
    state.partial[node] = blocks


def stabilize_trace(
    g: InteractionGraph, samples: Sequence[LabeledSample]
) -> tuple[CoalitionStructure, StabilizerState]:
    """Run the stabilizer and return the partition plus its internal state."""
    forest = root_forest(g)
    state = StabilizerState(forest=forest, samples=tuple(samples))
    for node in forest.bottom_up_order():
        _process_node(state, node)
    blocks: tuple[Coalition, ...] = ()
    for root in forest.roots:
        blocks += state.partial[root]
    return CoalitionStructure.from_blocks(blocks), state


def pac_stabilize(
    g: InteractionGraph,
    samples: Sequence[LabeledSample],
    params: PacParams,
    force: bool = False,
) -> CoalitionStructure:
    """Compute a probably-stable partition of a forest game from samples.

    Requires at least required_sample_size(n, epsilon, delta) samples
    unless `force` is set. Raises NotAForestError on cyclic graphs.
    """
    required = required_sample_size(g.n, params.epsilon, params.delta)
    if not force and len(samples) < required:
        raise InsufficientSamplesError(required, len(samples))
    partition, _ = stabilize_trace(g, samples)
    return partition


@dataclass(frozen=True)
class FlaggedSample:
    """A labeled sample plus its connectivity in the (hidden) true graph."""

    sample: LabeledSample
    connected: bool


EMPTY_SAMPLE = LabeledSample(EMPTY_COALITION, {})


def _take(stream: Iterator[FlaggedSample], count: int) -> list[FlaggedSample]:
    taken = []
    for _ in range(count):
        try:
            taken.append(next(stream))
        except StopIteration:
            raise InsufficientSamplesError(count, len(taken)) from None
    return taken


def unknown_forest_trace(
    stream: Iterable[FlaggedSample], n: int, params: PacParams
) -> tuple[CoalitionStructure, InteractionGraph]:
    """Two-phase pipeline for games whose forest structure is hidden.

    Phase 1 consumes enough flagged samples to infer a forest consistent
    with every truly-connected draw (disconnected draws count as the empty
    placeholder). Phase 2 consumes a fresh batch, keeps only draws whose
    connectivity the inferred forest reproduces, and stabilizes on it.
    Both phases run at half the error and confidence budgets.
    """
    half = params.halved()
    it = iter(stream)
    if n >= 2:
        phase1 = _take(it, forest_class_sample_size(n, half.epsilon, half.delta))
        positives = {
            fs.sample.coalition for fs in phase1 if fs.connected and fs.sample.coalition
        }
        inferred = infer_forest(
            [ConnectivitySample(c, connected=True) for c in sorted(positives, key=lambda c: c.members)],
            n,
        )
        if inferred is None:
            raise NoConsistentForestError(
                "no forest is consistent with the flagged-connected samples"
            )
    else:
        inferred = InteractionGraph.from_edges(n, [])
    phase2 = _take(it, required_sample_size(n, half.epsilon, half.delta))
    cleaned = [
        fs.sample
        if fs.connected and is_connected(inferred, fs.sample.coalition)
        else EMPTY_SAMPLE
        for fs in phase2
    ]
    return pac_stabilize(inferred, cleaned, half), inferred


def pac_stabilize_unknown_forest(
    stream: Iterable[FlaggedSample], n: int, params: PacParams
) -> CoalitionStructure:
    partition, _ = unknown_forest_trace(stream, n, params)
    return partition


def blocking_mass_by_apex(
    forest: RootedForest, oracle: UtilityOracle, pi: CoalitionStructure, dist
) -> dict[int, float]:
    """Blocking probability split by the highest node of the blocking set.

    Only finite-support distributions are accepted; disconnected support
    sets have no well-defined apex and are accumulated under key -1.
    """
    support = getattr(dist, "support", None)
    if support is None:
        raise ValueError("distribution has no finite support")
    mass: dict[int, float] = {}
    for coalition, p in support():
        if not strongly_blocks(oracle, coalition, pi):
            continue
        key = (
            forest.apex(coalition)
            if coalition and is_connected(forest.graph, coalition)
            else -1
        )
        mass[key] = mass.get(key, 0.0) + p
    return mass

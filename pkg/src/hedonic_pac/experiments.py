"""Experiment orchestration and empirical verification of stability.

Each trial derives its own seed from the master seed, builds a fresh random
game and distribution, stabilizes from the prescribed number of samples,
and measures the blocking probability of the output, either exactly over a
finite support or empirically from fresh draws.
"""
from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass

from .game import (
    Coalition,
    CoalitionStructure,
    HashUtilityOracle,
    InteractionGraph,
    UtilityOracle,
    blocking_probability,
    stable_u64,
    strongly_blocks,
)
from .sampling import (
    FiniteSupportDistribution,
    GrowSubtreeSampler,
    labeled_samples,
    random_forest,
    random_tree,
)
from .stabilizer import PacParams, pac_stabilize, required_sample_size

EMPIRICAL_TOLERANCE = 0.02


@dataclass(frozen=True)
class EmpiricalRate:
    rate: float
    std_error: float
    draws: int


def empirical_blocking_rate(
    oracle: UtilityOracle,
    pi: CoalitionStructure,
    dist,
    fresh_count: int,
    seed: int,
) -> EmpiricalRate:
    """Monte Carlo estimate of the blocking probability from fresh draws."""
    if fresh_count < 1:
        raise ValueError("fresh_count must be positive")
    hits = sum(
        1
        for k in range(fresh_count)
        if strongly_blocks(oracle, dist.draw_one(seed, k), pi)
    )
    rate = hits / fresh_count
    std_error = math.sqrt(rate * (1.0 - rate) / fresh_count)
    return EmpiricalRate(rate=rate, std_error=std_error, draws=fresh_count)


def finite_restriction(
    sampler, seed: int, support_size: int
) -> FiniteSupportDistribution:
    """Finite-support stand-in for a generative sampler: `support_size`
    draws with equal weight, duplicates merged."""
    if support_size < 1:
        raise ValueError("support_size must be positive")
    coalitions = [sampler.draw_one(seed, k) for k in range(support_size)]
    return FiniteSupportDistribution(
        coalitions, [1.0 / support_size] * support_size
    )


def mixed_support(
    graph: InteractionGraph,
    seed: int,
    support_size: int,
    disconnected_share: float = 0.2,
    stop_prob: float = 0.3,
) -> FiniteSupportDistribution:
    """Finite distribution mixing grown connected sets with raw vertex subsets.

    The raw subsets are usually disconnected, which exercises consumers
    that must cope with infeasible draws.
    """
    grower = GrowSubtreeSampler(graph, salt=stable_u64("mix", seed), stop_prob=stop_prob)
    raw_count = max(1, int(support_size * disconnected_share))
    grow_count = max(1, support_size - raw_count)
    coalitions = [grower.draw_one(seed, k) for k in range(grow_count)]
    for k in range(raw_count):
        rng = random.Random(stable_u64("mix-raw", seed, k))
        size = rng.randint(1, max(1, graph.n // 2))
        coalitions.append(Coalition.of(rng.sample(range(graph.n), size)))
    return FiniteSupportDistribution(
        coalitions, [1.0 / len(coalitions)] * len(coalitions)
    )


@dataclass(frozen=True)
class ExperimentConfig:
    n: int
    trials: int
    epsilon: float
    delta: float
    seed: int = 0
    graph_kind: str = "tree"  # tree | forest
    eval_mode: str = "exact"  # exact | empirical
    support_size: int = 400
    fresh_count: int = 10000
    stop_prob: float = 0.3

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be positive")
        if self.eval_mode not in ("exact", "empirical"):
            raise ValueError(f"unknown eval_mode {self.eval_mode!r}")
        if self.eval_mode == "empirical" and self.fresh_count < 1000:
            raise ValueError("empirical evaluation needs at least 1000 fresh draws")
        PacParams(self.epsilon, self.delta)


@dataclass(frozen=True)
class TrialRow:
    trial: int
    seed: int
    n: int
    m: int
    epsilon: float
    delta: float
    blocking_prob: float
    passed: bool


@dataclass(frozen=True)
class ExperimentReport:
    config: ExperimentConfig
    rows: tuple[TrialRow, ...]
    wall_time: float

    @property
    def pass_rate(self) -> float:
        return sum(r.passed for r in self.rows) / len(self.rows)


CSV_COLUMNS = ("trial", "seed", "n", "m", "epsilon", "delta", "blocking_prob", "pass")


def report_to_csv(report: ExperimentReport) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for r in report.rows:
        lines.append(
            f"{r.trial},{r.seed},{r.n},{r.m},{r.epsilon:g},{r.delta:g},"
            f"{r.blocking_prob:.6f},{int(r.passed)}"
        )
    return "\n".join(lines) + "\n"


def _run_trial(cfg: ExperimentConfig, trial: int) -> TrialRow:
    trial_seed = stable_u64("trial", cfg.seed, trial)
    if cfg.graph_kind == "forest":
        graph = random_forest(cfg.n, trial_seed)
    else:
        graph = random_tree(cfg.n, trial_seed)
    oracle = HashUtilityOracle(graph, seed=stable_u64("oracle", trial_seed))
    sampler = GrowSubtreeSampler(
        graph, salt=stable_u64("sampler", trial_seed), stop_prob=cfg.stop_prob
    )
    params = PacParams(cfg.epsilon, cfg.delta)
    m = required_sample_size(cfg.n, cfg.epsilon, cfg.delta)
    if cfg.eval_mode == "exact":
        dist = finite_restriction(
            sampler, stable_u64("support", trial_seed), cfg.support_size
        )
    else:
        dist = sampler
    coalitions = [dist.draw_one(stable_u64("train", trial_seed), k) for k in range(m)]
    pi = pac_stabilize(graph, labeled_samples(oracle, coalitions), params)
    if cfg.eval_mode == "exact":
        prob = blocking_probability(oracle, pi, dist)
        passed = prob < cfg.epsilon
    else:
        est = empirical_blocking_rate(
            oracle, pi, dist, cfg.fresh_count, stable_u64("fresh", trial_seed)
        )
        prob = est.rate
        passed = prob < cfg.epsilon + EMPIRICAL_TOLERANCE
    return TrialRow(
        trial=trial,
        seed=trial_seed,
        n=cfg.n,
        m=m,
        epsilon=cfg.epsilon,
        delta=cfg.delta,
        blocking_prob=prob,
        passed=passed,
    )


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Run all trials; rows are ordered by trial index and each trial is
    individually replayable from its derived seed."""
    start = time.perf_counter()
    rows = tuple(_run_trial(cfg, t) for t in range(cfg.trials))
    return ExperimentReport(
        config=cfg, rows=rows, wall_time=time.perf_counter() - start
    )


@dataclass(frozen=True)
class CheckReport:
    blocking_prob: float
    blockers: tuple[Coalition, ...]


def check_partition(
    oracle: UtilityOracle, pi: CoalitionStructure, dist
) -> CheckReport:
    """Exact blocking probability plus the support coalitions that block."""
    support = getattr(dist, "support", None)
    if support is None:
        raise ValueError("distribution has no finite support; use empirical_blocking_rate")
    blockers = tuple(
        c for c, _ in support() if strongly_blocks(oracle, c, pi)
    )
    return CheckReport(
        blocking_prob=blocking_probability(oracle, pi, dist), blockers=blockers
    )

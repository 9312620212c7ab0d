"""Constructive negative results: SAT reductions, the cycle counterexample,
and shattering witnesses.

The reduction maps a (3,B2) CNF formula (every variable occurring exactly
twice positively and twice negatively, three literals per clause) to a set
of labeled connectivity samples over a cast of players such that a
consistent path exists iff the formula is satisfiable. The cycle
counterexample produces two games on a k-cycle that are indistinguishable
from samples of the same three-coalition distribution yet have disjoint
sets of low-blocking partitions.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations, product
from typing import Iterable, Optional, Sequence

from .game import (
    CapacityError,
    Coalition,
    CoalitionStructure,
    InteractionGraph,
    TableOracle,
    blocking_probability,
    enumerate_connected_partitions,
    is_connected,
    stable_u64,
)
from .inference import ConnectivitySample
from .sampling import FiniteSupportDistribution


class B2FormulaError(ValueError):
    """The formula violates the (3,B2) occurrence discipline."""


Literal = tuple[int, bool]  # (variable id, is_positive)


@dataclass(frozen=True)
class B2SatFormula:
    """CNF with 3-literal clauses, each variable twice positive, twice negative."""

    num_vars: int
    clauses: tuple[tuple[Literal, Literal, Literal], ...]

    def __post_init__(self):
        counts: dict[Literal, int] = {}
        for clause in self.clauses:
            if len(clause) != 3:
                raise B2FormulaError("clauses must contain exactly 3 literals")
            for var, positive in clause:
                if not 0 <= var < self.num_vars:
                    raise B2FormulaError(f"variable {var} out of range")
                counts[(var, positive)] = counts.get((var, positive), 0) + 1
        for var in range(self.num_vars):
            for positive in (True, False):
                got = counts.get((var, positive), 0)
                if got != 2:
                    polarity = "positively" if positive else "negatively"
                    raise B2FormulaError(
                        f"variable {var} occurs {got} times {polarity}, expected 2"
                    )

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)

    def evaluate(self, assignment: Sequence[bool]) -> bool:
        return all(
            any(assignment[var] == positive for var, positive in clause)
            for clause in self.clauses
        )


def parse_dimacs(text: str) -> B2SatFormula:
    """Read a DIMACS CNF into a (3,B2) formula; validity is checked."""
    num_vars = None
    literals: list[int] = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith(("c", "%")):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) < 4 or parts[1] != "cnf":
                raise B2FormulaError(f"bad problem line: {line!r}")
            num_vars = int(parts[2])
            continue
        literals.extend(int(tok) for tok in line.split())
    if num_vars is None:
        raise B2FormulaError("missing 'p cnf' problem line")
    clauses: list[tuple[Literal, ...]] = []
    current: list[Literal] = []
    for lit in literals:
        if lit == 0:
            if current:
                clauses.append(tuple(current))
                current = []
            continue
        current.append((abs(lit) - 1, lit > 0))
    if current:
        clauses.append(tuple(current))
    return B2SatFormula(num_vars, tuple(clauses))  # type: ignore[arg-type]


def format_dimacs(formula: B2SatFormula) -> str:
    lines = [f"p cnf {formula.num_vars} {formula.num_clauses}"]
    for clause in formula.clauses:
        lines.append(
            " ".join(str(var + 1 if positive else -(var + 1)) for var, positive in clause)
            + " 0"
        )
    return "\n".join(lines) + "\n"


def random_b2_formula(num_vars: int, seed: int) -> B2SatFormula:
    """Random (3,B2) formula: the 4*num_vars occurrence pool shuffled into triples."""
    if num_vars % 3 != 0:
        raise B2FormulaError("num_vars must be divisible by 3 so that 3m = 4n")
    pool: list[Literal] = []
    for var in range(num_vars):
        pool += [(var, True)] * 2 + [(var, False)] * 2
    rng = random.Random(stable_u64("b2", seed))
    rng.shuffle(pool)
    clauses = tuple(tuple(pool[k : k + 3]) for k in range(0, len(pool), 3))
    return B2SatFormula(num_vars, clauses)  # type: ignore[arg-type]


def brute_force_sat(formula: B2SatFormula) -> Optional[tuple[bool, ...]]:
    """Exhaustive satisfiability check, guarded to 20 variables."""
    if formula.num_vars > 20:
        raise CapacityError(f"brute force guarded to 20 variables, got {formula.num_vars}")
    for bits in product((False, True), repeat=formula.num_vars):
        if formula.evaluate(bits):
            return bits
    return None


@dataclass(frozen=True)
class ReductionInstance:
    """Labeled connectivity samples encoding a (3,B2) formula.

    Players: a leaf s; two players per clause; two players per variable;
    four literal players per variable (one per occurrence); garbage
    collectors absorbing the literal players no gadget uses; a leaf t.
    `positive_pairs` must be connected, `negative_pairs` and
    `negative_triples` must not. Forest-mode instances additionally label
    every (N-1)-subset so only s and t may be leaves.
    """

    num_vars: int
    num_clauses: int
    role_names: tuple[str, ...]
    positive_pairs: tuple[Coalition, ...]
    negative_pairs: tuple[Coalition, ...]
    negative_triples: tuple[Coalition, ...]
    forest_mode: bool = False

    @property
    def n(self) -> int:
        return len(self.role_names)

    @property
    def num_garbage(self) -> int:
        return 2 * self.num_vars - self.num_clauses + 1

    @cached_property
    def id_of(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.role_names)}

    def samples(self) -> list[ConnectivitySample]:
        out = [ConnectivitySample(c, True) for c in self.positive_pairs]
        out += [ConnectivitySample(c, False) for c in self.negative_pairs]
        out += [ConnectivitySample(c, False) for c in self.negative_triples]
        if self.forest_mode:
            everyone = set(range(self.n))
            leaves = {self.id_of["s"], self.id_of["t"]}
            for v in range(self.n):
                rest = Coalition.of(everyone - {v})
                out.append(ConnectivitySample(rest, v in leaves))
        return out


def _build_roles(formula: B2SatFormula) -> tuple[list[str], dict[tuple[int, bool, int], str]]:
    """Player roster plus the (variable, polarity, occurrence) -> role map."""
    n, m = formula.num_vars, formula.num_clauses
    k = 2 * n - m + 1
    names = ["s"]
    for j in range(1, m + 1):
        names += [f"c{j}(1)", f"c{j}(2)"]
    for i in range(1, n + 1):
        names += [f"v{i}(1)", f"v{i}(2)"]
    for i in range(1, n + 1):
        names += [f"x{i}(1)", f"x{i}(2)", f"-x{i}(1)", f"-x{i}(2)"]
    names += [f"g{q}" for q in range(1, k + 1)]
    names.append("t")
    occurrence_role = {}
    for var in range(formula.num_vars):
        for positive in (True, False):
            prefix = f"x{var + 1}" if positive else f"-x{var + 1}"
            for occ in (1, 2):
                occurrence_role[(var, positive, occ)] = f"{prefix}({occ})"
    return names, occurrence_role


def _clause_occurrences(formula: B2SatFormula) -> list[list[tuple[int, bool, int]]]:
    """Per clause, the (variable, polarity, occurrence index) of each slot."""
    seen: dict[Literal, int] = {}
    out = []
    for clause in formula.clauses:
        slots = []
        for var, positive in clause:
            seen[(var, positive)] = seen.get((var, positive), 0) + 1
            slots.append((var, positive, seen[(var, positive)]))
        out.append(slots)
    return out


def reduce_sat_to_path(formula: B2SatFormula, forest_mode: bool = False) -> ReductionInstance:
    """Emit the labeled pairs and triples whose consistent paths encode
    satisfying assignments of the formula."""
    n, m = formula.num_vars, formula.num_clauses
    k = 2 * n - m + 1
    names, occurrence_role = _build_roles(formula)
    ids = {name: i for i, name in enumerate(names)}
    occurrences = _clause_occurrences(formula)

    def pair(a: str, b: str) -> Coalition:
        return Coalition.of((ids[a], ids[b]))

    positive_pairs = [
        pair("s", "c1(1)"),
        pair(f"c{m}(2)", "v1(1)"),
        pair(f"v{n}(2)", "g1"),
        pair(f"g{k}", "t"),
    ]
    positive_pairs += [pair(f"c{j}(2)", f"c{j + 1}(1)") for j in range(1, m)]
    positive_pairs += [pair(f"v{i}(2)", f"v{i + 1}(1)") for i in range(1, n)]

    excepted: set[Coalition] = set(positive_pairs)
    # Variable players may touch their own-occurrence literal players.
    for var in range(n):
        for h in (1, 2):
            for positive in (True, False):
                excepted.add(pair(f"v{var + 1}({h})", occurrence_role[(var, positive, h)]))
    # Clause players may touch the literal players occurring in that clause.
    for j, slots in enumerate(occurrences, start=1):
        for slot in slots:
            for h in (1, 2):
                excepted.add(pair(f"c{j}({h})", occurrence_role[slot]))
    # Same-polarity literal pairs of one variable may touch each other.
    for var in range(n):
        for positive in (True, False):
            excepted.add(
                pair(occurrence_role[(var, positive, 1)], occurrence_role[(var, positive, 2)])
            )
    # Literal players may touch garbage collectors.
    for var in range(n):
        for positive in (True, False):
            for occ in (1, 2):
                for q in range(1, k + 1):
                    excepted.add(pair(occurrence_role[(var, positive, occ)], f"g{q}"))

    negative_pairs = [
        Coalition.of(p)
        for p in combinations(range(len(names)), 2)
        if Coalition.of(p) not in excepted
    ]

    negative_triples: set[Coalition] = set()
    for var in range(n):
        i = var + 1
        before = ids[f"v{i - 1}(2)"] if i > 1 else ids[f"c{m}(2)"]
        v1 = ids[f"v{i}(1)"]
        v2 = ids[f"v{i}(2)"]
        for positive in (True, False):
            first = ids[occurrence_role[(var, positive, 1)]]
            second = ids[occurrence_role[(var, positive, 2)]]
            for y in range(len(names)):
                if y not in (before, second, v1, first):
                    negative_triples.add(Coalition.of((v1, first, y)))
                if y not in (v1, v2, first, second):
                    negative_triples.add(Coalition.of((first, second, y)))

    return ReductionInstance(
        num_vars=n,
        num_clauses=m,
        role_names=tuple(names),
        positive_pairs=tuple(positive_pairs),
        negative_pairs=tuple(negative_pairs),
        negative_triples=tuple(sorted(negative_triples, key=lambda c: c.members)),
        forest_mode=forest_mode,
    )


def reduce_sat_to_forest(formula: B2SatFormula) -> ReductionInstance:
    """As reduce_sat_to_path, plus (N-1)-subset labels forcing exactly two leaves."""
    return reduce_sat_to_path(formula, forest_mode=True)


class GadgetContradictionError(ValueError):
    """A variable gadget in the solved path is bridged by neither literal pair."""


def extract_assignment(ordering: Sequence[int], inst: ReductionInstance) -> tuple[bool, ...]:
    """Read the encoded assignment off a consistent path ordering.

    A variable is true iff its negative literal pair lies between its two
    variable players; orientation of the path does not matter.
    """
    position = {player: pos for pos, player in enumerate(ordering)}
    if len(position) != inst.n:
        raise ValueError("ordering must enumerate every player exactly once")
    assignment = []
    for var in range(inst.num_vars):
        i = var + 1
        lo, hi = sorted(
            (position[inst.id_of[f"v{i}(1)"]], position[inst.id_of[f"v{i}(2)"]])
        )

        def between(prefix: str) -> bool:
            return all(
                lo < position[inst.id_of[f"{prefix}({occ})"]] < hi for occ in (1, 2)
            )

        negative_between = between(f"-x{i}")
        positive_between = between(f"x{i}")
        if negative_between == positive_between:
            raise GadgetContradictionError(
                f"variable gadget {i} is bridged by "
                f"{'both polarities' if negative_between else 'neither polarity'}"
            )
        assignment.append(negative_between)
    return tuple(assignment)


# --- cycle counterexample -------------------------------------------------

DISCONNECTED_VALUE = -10.0


def _cycle_named_sets(k: int) -> tuple[Coalition, Coalition, Coalition]:
    # 0-based shift of the construction: S1 = {0,1}, S2 = {1,2},
    # S3 = {2, 3, ..., k-1, 0}.
    s1 = Coalition.of((0, 1))
    s2 = Coalition.of((1, 2))
    s3 = Coalition.of(tuple(range(2, k)) + (0,))
    return s1, s2, s3


@dataclass(frozen=True)
class CycleCounterexample:
    """Two games on a k-cycle with disjoint low-blocking partition sets.

    Under `game_singleton_top`, players 0..2 like being alone best; under
    `game_grand_top`, everyone likes the full cycle best. Both games rank
    the three distribution sets the same cyclic way, so samples from the
    distribution cannot tell the games apart.
    """

    k: int
    graph: InteractionGraph
    named_sets: tuple[Coalition, Coalition, Coalition]
    game_singleton_top: TableOracle
    game_grand_top: TableOracle
    distribution: FiniteSupportDistribution

    @property
    def full_cycle(self) -> Coalition:
        return Coalition.of(range(self.k))


def build_cycle_counterexample(k: int) -> CycleCounterexample:
    if k < 3:
        raise ValueError(f"a cycle needs at least 3 players, got {k}")
    graph = InteractionGraph.from_edges(
        k, [(v, (v + 1) % k) for v in range(k)]
    )
    sets = _cycle_named_sets(k)
    interior = [j for j in sets[2] if j not in (0, 1, 2)]
    full = Coalition.of(range(k))

    def named_entries(own: float, prev: float, interior_s3: float) -> dict[Coalition, dict[int, float]]:
        entries: dict[Coalition, dict[int, float]] = {s: {} for s in sets}
        for i in (0, 1, 2):
            entries[sets[i]][i] = own
            entries[sets[i - 1]][i] = prev
        for j in interior:
            entries[sets[2]][j] = interior_s3
        return entries

    # Singleton-top game: players 0..2 rank {i} > own pair > previous set >
    # any other connected coalition; interior players want the big arc.
    entries_one = named_entries(own=-1.0, prev=-2.0, interior_s3=1.0)
    if interior:
        for coalition in _cycle_connected_sets(graph):
            if len(coalition) == 1 or coalition in entries_one:
                continue
            listed = {j: -1.0 for j in coalition if j in set(interior)}
            if listed:
                entries_one[coalition] = listed
    game_one = TableOracle(
        graph,
        entries_one,
        default_connected=-3.0,
        default_disconnected=DISCONNECTED_VALUE,
    )

    # Grand-coalition-top game: the full cycle beats everything, own pair
    # beats the previous set, which still beats staying alone.
    entries_two = named_entries(own=1.0, prev=0.5, interior_s3=1.0)
    entries_two[full] = {i: 2.0 for i in range(k)}
    game_two = TableOracle(
        graph,
        entries_two,
        default_connected=-1.0,
        default_disconnected=DISCONNECTED_VALUE,
    )

    return CycleCounterexample(
        k=k,
        graph=graph,
        named_sets=sets,
        game_singleton_top=game_one,
        game_grand_top=game_two,
        distribution=FiniteSupportDistribution.uniform(list(sets)),
    )


def _cycle_connected_sets(graph: InteractionGraph) -> list[Coalition]:
    # Connected subsets of a cycle are its arcs plus the full vertex set.
    k = graph.n
    out = [Coalition.of(range(k))]
    for start in range(k):
        for length in range(1, k):
            out.append(Coalition.of((start + d) % k for d in range(length)))
    return sorted(set(out), key=lambda c: (len(c), c.members))


@dataclass(frozen=True)
class StableSetsReport:
    """Outcome of enumerating low-blocking partitions for both cycle games."""

    k: int
    low_blocking_singleton_game: tuple[CoalitionStructure, ...]
    low_blocking_grand_game: tuple[CoalitionStructure, ...]

    @property
    def disjoint(self) -> bool:
        return not set(self.low_blocking_singleton_game) & set(
            self.low_blocking_grand_game
        )

    def singleton_witness_ok(self) -> bool:
        named = {Coalition((0,)), Coalition((1,)), Coalition((2,))}
        return all(
            any(b in named for b in pi)
            for pi in self.low_blocking_singleton_game
        )

    def grand_witness_ok(self) -> bool:
        full = Coalition.of(range(self.k))
        return all(full in pi.blocks for pi in self.low_blocking_grand_game)

    @property
    def holds(self) -> bool:
        return (
            bool(self.low_blocking_singleton_game)
            and bool(self.low_blocking_grand_game)
            and self.disjoint
            and self.singleton_witness_ok()
            and self.grand_witness_ok()
        )


def stable_sets_disjoint(k: int) -> StableSetsReport:
    """Enumerate connected partitions of the k-cycle and split them into the
    sets with blocking probability < 1/3 under each counterexample game."""
    if k > 6:
        raise CapacityError(f"partition enumeration guarded to k <= 6, got {k}")
    ce = build_cycle_counterexample(k)
    threshold = 1.0 / 3.0
    a_one, a_two = [], []
    for pi in enumerate_connected_partitions(ce.graph):
        if blocking_probability(ce.game_singleton_top, pi, ce.distribution) < threshold:
            a_one.append(pi)
        if blocking_probability(ce.game_grand_top, pi, ce.distribution) < threshold:
            a_two.append(pi)
    return StableSetsReport(k, tuple(a_one), tuple(a_two))


# --- shattering witness ----------------------------------------------------

ShatterTarget = tuple[Coalition, float, int]  # (coalition, threshold, label)


def build_shattering_valuation(
    graph: InteractionGraph, player: int, targets: Sequence[ShatterTarget]
) -> TableOracle:
    """A valuation for one player meeting v(S) >= r exactly on label-1 targets.

    Label-1 targets take the threshold itself, label-0 targets a value
    strictly below both the threshold and 0. The singleton stays pinned at
    0, so demands on it are only satisfiable when the pin already meets
    them.
    """
    entries: dict[Coalition, dict[int, float]] = {}
    seen: set[Coalition] = set()
    for coalition, threshold, label in targets:
        if player not in coalition:
            raise ValueError(f"target {coalition.members} does not contain player {player}")
        if not is_connected(graph, coalition):
            raise ValueError(f"target {coalition.members} is not feasible")
        if coalition in seen:
            raise ValueError(f"duplicate target {coalition.members}")
        seen.add(coalition)
        if len(coalition) == 1:
            pinned_ok = (0.0 >= threshold) if label else (0.0 < threshold)
            if not pinned_ok:
                raise ValueError(
                    f"singleton value is pinned to 0, cannot satisfy "
                    f"(r={threshold}, label={label})"
                )
            continue
        value = threshold if label else min(threshold, 0.0) - 0.5
        entries[coalition] = {player: value}
    return TableOracle(graph, entries, default_connected=0.0, default_disconnected=-1.0)

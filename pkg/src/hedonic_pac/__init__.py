"""Stabilization toolkit for hedonic games restricted by interaction graphs.

Find probably-stable partitions of forest games from preference samples,
infer forest structure from connectivity observations, and generate the
constructions showing where those guarantees stop: cyclic graphs and
negative-label consistency.
"""
from .game import (
    CapacityError,
    Coalition,
    CoalitionStructure,
    EMPTY_COALITION,
    HashUtilityOracle,
    InteractionGraph,
    LabeledSample,
    TableOracle,
    UtilityOracle,
    blocking_probability,
    enumerate_connected_coalitions,
    enumerate_connected_partitions,
    find_core_bruteforce,
    is_connected,
    singleton_partition,
    strongly_blocks,
    value_vector,
)
from .sampling import (
    FiniteSupportDistribution,
    GrowSubtreeSampler,
    RandomGameSpec,
    draw,
    labeled_samples,
    random_connected_sampler,
    random_forest,
    random_tree,
)
from .stabilizer import (
    FlaggedSample,
    InsufficientSamplesError,
    NotAForestError,
    PacParams,
    RootedForest,
    blocking_mass_by_apex,
    candidate_set,
    forest_class_sample_size,
    pac_stabilize,
    pac_stabilize_unknown_forest,
    required_sample_size,
    root_forest,
    stabilize_trace,
    unknown_forest_trace,
)
from .inference import (
    ConnectivitySample,
    NoConsistentForestError,
    PathSearchResult,
    backtrack_consistent_path,
    bruteforce_consistent_forest,
    check_consistency,
    infer_forest,
)
from .hardness import (
    B2FormulaError,
    B2SatFormula,
    CycleCounterexample,
    GadgetContradictionError,
    ReductionInstance,
    StableSetsReport,
    brute_force_sat,
    build_cycle_counterexample,
    build_shattering_valuation,
    extract_assignment,
    parse_dimacs,
    random_b2_formula,
    reduce_sat_to_forest,
    reduce_sat_to_path,
    stable_sets_disjoint,
)
from .experiments import (
    CheckReport,
    EmpiricalRate,
    ExperimentConfig,
    ExperimentReport,
    check_partition,
    empirical_blocking_rate,
    finite_restriction,
    mixed_support,
    run_experiment,
)

__version__ = "0.1.0"

"""Command-line front door.

Exit codes: 0 success, 1 usage error, 2 domain error (cyclic graph, bad
formula, malformed input), 3 capacity or timeout. The HEDONIC_TIMEOUT_SECS
environment variable sets the default search budget.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import files
from .game import CapacityError, Coalition
from .experiments import (
    CheckReport,
    ExperimentConfig,
    check_partition,
    report_to_csv,
    run_experiment,
)
from .hardness import (
    B2FormulaError,
    build_cycle_counterexample,
    build_shattering_valuation,
    extract_assignment,
    parse_dimacs,
    reduce_sat_to_forest,
    reduce_sat_to_path,
)
from .inference import backtrack_consistent_path, bruteforce_consistent_forest, infer_forest
from .stabilizer import (
    InsufficientSamplesError,
    NotAForestError,
    PacParams,
    pac_stabilize,
    unknown_forest_trace,
)

DEFAULT_TIMEOUT = 60.0

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DOMAIN = 2
EXIT_CAPACITY = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); we reserve 2 for domain errors
        raise UsageError(message)


def _default_timeout() -> float:
    raw = os.environ.get("HEDONIC_TIMEOUT_SECS")
    if raw is None:
        return DEFAULT_TIMEOUT
    try:
        return float(raw)
    except ValueError:
        raise UsageError(f"HEDONIC_TIMEOUT_SECS must be a number, got {raw!r}") from None


def _emit(payload: dict, fmt: str = "json") -> None:
    if fmt == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        for key, value in payload.items():
            print(f"{key}: {value}")


def _cmd_stabilize(args) -> int:
    graph, oracle = files.load_game(args.game)
    samples = files.load_samples(args.samples)
    params = PacParams(args.epsilon, args.delta)
    pi = pac_stabilize(graph, samples, params, force=args.force)
    if args.out:
        files.save_partition(args.out, pi)
    _emit(
        {
            "n": graph.n,
            "samples": len(samples),
            "blocks": [list(b.members) for b in pi.blocks],
            "out": args.out,
        },
        args.format,
    )
    return EXIT_OK


def _cmd_stabilize_unknown(args) -> int:
    file_n, stream = files.load_flagged_stream(args.stream)
    n = args.n if args.n is not None else file_n
    if n is None:
        raise UsageError("player count missing: pass --n or store it in the stream file")
    params = PacParams(args.epsilon, args.delta)
    pi, inferred = unknown_forest_trace(stream, n, params)
    if args.out:
        files.save_partition(args.out, pi)
    _emit(
        {
            "n": n,
            "inferred_edges": [list(e) for e in sorted(inferred.edges)],
            "blocks": [list(b.members) for b in pi.blocks],
            "out": args.out,
        },
        args.format,
    )
    return EXIT_OK


def _cmd_infer_forest(args) -> int:
    file_n, samples = files.load_connectivity_samples(args.samples)
    n = args.n if args.n is not None else file_n
    if n is None:
        raise UsageError("player count missing: pass --n or store it in the samples file")
    forest = infer_forest(samples, n)
    if forest is None:
        _emit({"found": False, "n": n}, args.format)
        return EXIT_OK
    if args.out:
        files.save_forest(args.out, forest)
    _emit(
        {
            "found": True,
            "n": n,
            "edges": [list(e) for e in sorted(forest.edges)],
            "out": args.out,
        },
        args.format,
    )
    return EXIT_OK


def _cmd_solve_consistency(args) -> int:
    inst = files.load_instance(args.instance)
    timeout = args.timeout if args.timeout is not None else _default_timeout()
    if args.method == "bruteforce":
        forest = bruteforce_consistent_forest(inst.samples(), inst.n)
        payload = {
            "method": "bruteforce",
            "status": "found" if forest is not None else "absent",
        }
        if forest is not None:
            payload["edges"] = [list(e) for e in sorted(forest.edges)]
        _emit(payload, args.format)
        return EXIT_OK
    result = backtrack_consistent_path(inst.samples(), inst.n, timeout_secs=timeout)
    payload = {"method": "backtrack", "status": result.status}
    if result.found:
        ordering = list(result.ordering)
        payload["ordering"] = ordering
        payload["roles"] = [inst.role_names[v] for v in ordering]
        assignment = extract_assignment(result.ordering, inst)
        payload["assignment"] = {
            f"x{i + 1}": value for i, value in enumerate(assignment)
        }
    _emit(payload, args.format)
    return EXIT_CAPACITY if result.status == "unknown" else EXIT_OK


def _cmd_reduce(args) -> int:
    formula = parse_dimacs(Path(args.cnf).read_text(encoding="utf-8"))
    if args.target == "forest":
        inst = reduce_sat_to_forest(formula)
    else:
        inst = reduce_sat_to_path(formula)
    files.save_instance(args.out, inst)
    _emit(
        {
            "players": inst.n,
            "garbage_collectors": inst.num_garbage,
            "samples": len(inst.samples()),
            "out": args.out,
        },
        args.format,
    )
    return EXIT_OK


def _cmd_counterexample(args) -> int:
    ce = build_cycle_counterexample(args.k)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    files.save_game(outdir / "gamma1.json", ce.graph, ce.game_singleton_top)
    files.save_game(outdir / "gamma2.json", ce.graph, ce.game_grand_top)
    files.save_distribution(outdir / "D.json", ce.distribution)
    _emit(
        {
            "k": args.k,
            "support": [list(s.members) for s in ce.named_sets],
            "files": sorted(p.name for p in outdir.iterdir()),
            "out": str(outdir),
        },
        args.format,
    )
    return EXIT_OK


def _cmd_shatter(args) -> int:
    graph = files.load_forest(args.graph)
    payload = json.loads(Path(args.labels).read_text(encoding="utf-8"))
    targets = [
        (
            Coalition.of(row["coalition"]),
            float(row.get("r", 1.0)),
            int(row["label"]),
        )
        for row in payload["targets"]
    ]
    oracle = build_shattering_valuation(graph, args.player, targets)
    satisfied = all(
        (oracle.value(args.player, c) >= r) == bool(label) for c, r, label in targets
    )
    result = {
        "player": args.player,
        "targets": len(targets),
        "all_satisfied": satisfied,
        "values": [
            {"coalition": list(c.members), "value": oracle.value(args.player, c)}
            for c, _, _ in targets
        ],
    }
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(result, fh, indent=2, sort_keys=True)
            fh.write("\n")
    _emit(result, args.format)
    return EXIT_OK


def _cmd_check(args) -> int:
    graph, oracle = files.load_game(args.game)
    pi = files.load_partition(args.partition)
    if pi.n != graph.n:
        raise ValueError(f"partition covers {pi.n} players, game has {graph.n}")
    dist = files.load_distribution(args.dist, graph=graph)
    report: CheckReport = check_partition(oracle, pi, dist)
    _emit(
        {
            "blocking_probability": report.blocking_prob,
            "blockers": [list(c.members) for c in report.blockers],
        },
        args.format,
    )
    return EXIT_OK


def _cmd_experiment(args) -> int:
    cfg = ExperimentConfig(
        n=args.n,
        trials=args.trials,
        epsilon=args.epsilon,
        delta=args.delta,
        seed=args.seed,
        graph_kind=args.graph,
        eval_mode=args.mode,
        support_size=args.support,
        fresh_count=args.fresh,
        stop_prob=args.stop_prob,
    )
    report = run_experiment(cfg)
    if args.out:
        out = Path(args.out)
        if args.format == "csv":
            out.write_text(report_to_csv(report), encoding="utf-8")
        else:
            out.write_text(
                json.dumps(
                    {
                        "pass_rate": report.pass_rate,
                        "wall_time": report.wall_time,
                        "rows": [vars(r) | {} for r in report.rows],
                    },
                    indent=2,
                    sort_keys=True,
                    default=str,
                ),
                encoding="utf-8",
            )
    print(report_to_csv(report), end="")
    print(f"# pass_rate={report.pass_rate:.3f} wall_time={report.wall_time:.2f}s", file=sys.stderr)
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="hedonic-pac", description=__doc__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=None)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stabilize", parents=[common], help="stabilize a forest game from samples")
    p.add_argument("--game", required=True)
    p.add_argument("--samples", required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--force", action="store_true", help="skip the sample-count check")
    p.set_defaults(func=_cmd_stabilize)

    p = sub.add_parser(
        "stabilize-unknown", parents=[common], help="two-phase stabilization, graph unknown"
    )
    p.add_argument("--stream", required=True)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.set_defaults(func=_cmd_stabilize_unknown)

    p = sub.add_parser(
        "infer-forest", parents=[common], help="forest consistent with connected samples"
    )
    p.add_argument("--samples", required=True)
    p.add_argument("--n", type=int, default=None)
    p.set_defaults(func=_cmd_infer_forest)

    p = sub.add_parser(
        "solve-consistency", parents=[common], help="path/forest consistent with labeled samples"
    )
    p.add_argument("--instance", required=True)
    p.add_argument("--method", choices=("backtrack", "bruteforce"), default="backtrack")
    p.add_argument("--timeout", type=float, default=None)
    p.set_defaults(func=_cmd_solve_consistency)

    p = sub.add_parser("reduce", parents=[common], help="reduce a (3,B2) CNF to labeled samples")
    p.add_argument("--cnf", required=True)
    p.add_argument("--target", choices=("path", "forest"), default="path")
    p.set_defaults(func=_cmd_reduce)

    p = sub.add_parser(
        "counterexample", parents=[common], help="emit the cycle counterexample games"
    )
    p.add_argument("--k", type=int, required=True)
    p.set_defaults(func=_cmd_counterexample)

    p = sub.add_parser("shatter", parents=[common], help="valuation matching arbitrary labels")
    p.add_argument("--graph", required=True)
    p.add_argument("--player", type=int, required=True)
    p.add_argument("--labels", required=True)
    p.set_defaults(func=_cmd_shatter)

    p = sub.add_parser("check", parents=[common], help="exact blocking probability of a partition")
    p.add_argument("--game", required=True)
    p.add_argument("--partition", required=True)
    p.add_argument("--dist", required=True)
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("experiment", parents=[common], help="random-game stabilization trials")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--graph", choices=("tree", "forest"), default="tree")
    p.add_argument("--mode", choices=("exact", "empirical"), default="exact")
    p.add_argument("--support", type=int, default=400)
    p.add_argument("--fresh", type=int, default=10000)
    p.add_argument("--stop-prob", type=float, default=0.3)
    p.set_defaults(func=_cmd_experiment)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (
        NotAForestError,
        InsufficientSamplesError,
        B2FormulaError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

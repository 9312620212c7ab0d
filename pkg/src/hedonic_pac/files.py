"""JSON file formats for games, partitions, samples, forests, distributions,
and reduction instances. All player ids are 0-based in files and in memory.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Optional, Union

from .game import Coalition, CoalitionStructure, InteractionGraph, LabeledSample, TableOracle
from .hardness import ReductionInstance
from .inference import ConnectivitySample
from .sampling import FiniteSupportDistribution, GrowSubtreeSampler
from .stabilizer import FlaggedSample

PathLike = Union[str, Path]


def _read(path: PathLike) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _write(path: PathLike, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


# --- games ------------------------------------------------------------------

def game_to_dict(graph: InteractionGraph, oracle: TableOracle) -> dict:
    return {
        "n": graph.n,
        "edges": [list(e) for e in sorted(graph.edges)],
        "utilities": [
            {
                "coalition": list(coalition.members),
                "values": {str(i): v for i, v in sorted(values.items())},
            }
            for coalition, values in sorted(
                oracle.entries.items(), key=lambda kv: kv[0].members
            )
        ],
        "default_connected": oracle.default_connected,
        "default_disconnected": oracle.default_disconnected,
    }


def game_from_dict(payload: dict) -> tuple[InteractionGraph, TableOracle]:
    graph = InteractionGraph.from_edges(payload["n"], payload.get("edges", []))
    entries = {
        Coalition.of(row["coalition"]): {int(i): float(v) for i, v in row["values"].items()}
        for row in payload.get("utilities", [])
    }
    oracle = TableOracle(
        graph,
        entries,
        default_connected=float(payload.get("default_connected", 0.0)),
        default_disconnected=float(payload.get("default_disconnected", -1.0)),
    )
    return graph, oracle


def save_game(path: PathLike, graph: InteractionGraph, oracle: TableOracle) -> None:
    _write(path, game_to_dict(graph, oracle))


def load_game(path: PathLike) -> tuple[InteractionGraph, TableOracle]:
    return game_from_dict(_read(path))


# --- partitions ---------------------------------------------------------------

def save_partition(path: PathLike, pi: CoalitionStructure) -> None:
    _write(path, {"blocks": [list(b.members) for b in pi.blocks]})


def load_partition(path: PathLike) -> CoalitionStructure:
    return CoalitionStructure.from_blocks(_read(path)["blocks"])


# --- labeled samples ----------------------------------------------------------

def samples_to_dict(samples: list[LabeledSample]) -> dict:
    return {
        "samples": [
            {
                "coalition": list(s.coalition.members),
                "values": {str(i): v for i, v in sorted(s.values.items())},
            }
            for s in samples
        ]
    }


def save_samples(path: PathLike, samples: list[LabeledSample]) -> None:
    _write(path, samples_to_dict(samples))


def load_samples(path: PathLike) -> list[LabeledSample]:
    return [
        LabeledSample(
            Coalition.of(row["coalition"]),
            {int(i): float(v) for i, v in row["values"].items()},
        )
        for row in _read(path)["samples"]
    ]


def save_flagged_stream(path: PathLike, n: int, stream: list[FlaggedSample]) -> None:
    _write(
        path,
        {
            "n": n,
            "samples": [
                {
                    "coalition": list(fs.sample.coalition.members),
                    "values": {str(i): v for i, v in sorted(fs.sample.values.items())},
                    "connected": fs.connected,
                }
                for fs in stream
            ],
        },
    )


def load_flagged_stream(path: PathLike) -> tuple[Optional[int], list[FlaggedSample]]:
    payload = _read(path)
    stream = []
    for row in payload["samples"]:
        if "connected" not in row:
            raise ValueError("stream samples need a 'connected' flag")
        sample = LabeledSample(
            Coalition.of(row["coalition"]),
            {int(i): float(v) for i, v in row["values"].items()},
        )
        stream.append(FlaggedSample(sample, bool(row["connected"])))
    return payload.get("n"), stream


# --- connectivity samples -------------------------------------------------------

def save_connectivity_samples(
    path: PathLike, n: int, samples: list[ConnectivitySample]
) -> None:
    _write(
        path,
        {
            "n": n,
            "samples": [
                {"vertices": list(s.vertices.members), "label": int(s.connected)}
                for s in samples
            ],
        },
    )


def load_connectivity_samples(path: PathLike) -> tuple[Optional[int], list[ConnectivitySample]]:
    payload = _read(path)
    samples = [
        ConnectivitySample(Coalition.of(row["vertices"]), bool(row["label"]))
        for row in payload["samples"]
    ]
    return payload.get("n"), samples


# --- forests ---------------------------------------------------------------------

def save_forest(path: PathLike, graph: InteractionGraph) -> None:
    _write(path, {"n": graph.n, "edges": [list(e) for e in sorted(graph.edges)]})


def load_forest(path: PathLike) -> InteractionGraph:
    payload = _read(path)
    return InteractionGraph.from_edges(payload["n"], payload.get("edges", []))


# --- distributions ------------------------------------------------------------------

def save_distribution(path: PathLike, dist: FiniteSupportDistribution) -> None:
    _write(
        path,
        {
            "type": "finite",
            "coalitions": [list(c.members) for c in dist.coalitions],
            "probabilities": list(dist.probabilities),
        },
    )


def load_distribution(path: PathLike, graph: Optional[InteractionGraph] = None):
    payload = _read(path)
    kind = payload.get("type", "finite")
    if kind == "finite":
        return FiniteSupportDistribution(
            [Coalition.of(c) for c in payload["coalitions"]],
            [float(p) for p in payload["probabilities"]],
        )
    if kind == "grow":
        if graph is None:
            raise ValueError("a grow distribution needs the game graph")
        return GrowSubtreeSampler(
            graph,
            salt=int(payload.get("seed", 0)),
            stop_prob=float(payload.get("stop_prob", 0.3)),
        )
    raise ValueError(f"unknown distribution type {kind!r}")


# --- reduction instances ---------------------------------------------------------------

def save_instance(path: PathLike, inst: ReductionInstance) -> None:
    _write(
        path,
        {
            "n": inst.n,
            "num_vars": inst.num_vars,
            "num_clauses": inst.num_clauses,
            "forest_mode": inst.forest_mode,
            "roles": {name: i for i, name in enumerate(inst.role_names)},
            "positive_pairs": [list(c.members) for c in inst.positive_pairs],
            "negative_pairs": [list(c.members) for c in inst.negative_pairs],
            "negative_triples": [list(c.members) for c in inst.negative_triples],
        },
    )


def load_instance(path: PathLike) -> ReductionInstance:
    payload = _read(path)
    roles = payload["roles"]
    names = [""] * len(roles)
    for name, i in roles.items():
        names[i] = name
    return ReductionInstance(
        num_vars=payload["num_vars"],
        num_clauses=payload["num_clauses"],
        role_names=tuple(names),
        positive_pairs=tuple(Coalition.of(c) for c in payload["positive_pairs"]),
        negative_pairs=tuple(Coalition.of(c) for c in payload["negative_pairs"]),
        negative_triples=tuple(Coalition.of(c) for c in payload["negative_triples"]),
        forest_mode=bool(payload.get("forest_mode", False)),
    )

"""Densest subgraph and low out-degree ordering on top of the private peel."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from dpkcore.graph import Graph, VertexSubset
from dpkcore.mechanisms import NoiseOracle
from dpkcore.oracle import orient_and_max_outdegree
from dpkcore.private_kcore import Engine, Schedule, default_schedule, run_peel

DEFAULT_C_PRIME = 120.0


def select_dense(labels: Sequence[float], n: int, epsilon: float, c_prime: float) -> list[int]:
    """Vertices whose label is within ``c_prime * ln(n) / ε`` of the top label.

    Pure post-processing of released labels.
    """
    top = max(labels)
    cut = top - c_prime * math.log(max(n, 2)) / epsilon
    return [v for v, lab in enumerate(labels) if lab >= cut]


def dp_densest_subgraph(
    g: Graph,
    epsilon: float,
    c_prime: float = DEFAULT_C_PRIME,
    oracle: NoiseOracle | None = None,
    schedule: Schedule | None = None,
    engine: Engine = "fast",
) -> VertexSubset:
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if not c_prime > 0:
        raise ValueError(f"c_prime must be positive, got {c_prime}")
    if g.n == 0:
        raise ValueError("graph has no vertices")
    oracle = oracle or NoiseOracle()
    schedule = schedule or default_schedule(max(g.n, 2), epsilon)
    labels = run_peel(g, epsilon, schedule, oracle, engine).labels
    return VertexSubset.of(g, select_dense(labels, g.n, epsilon, c_prime))


@dataclass(frozen=True)
class OrderingResult:
    order: list[int]
    # Evaluation only; computed from the true graph, never part of the release.
    realized_max_outdegree: int


def dp_low_outdegree_ordering(
    g: Graph,
    epsilon: float,
    schedule: Schedule | None = None,
    oracle: NoiseOracle | None = None,
    engine: Engine = "fast",
) -> OrderingResult:
    """Vertices in the order the private peel removes them.

    Vertices removed in the same round are listed by ascending id; vertices
    that survive the whole schedule go last, also by id.
    """
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    oracle = oracle or NoiseOracle()
    schedule = schedule or default_schedule(max(g.n, 2), epsilon)
    run = run_peel(g, epsilon, schedule, oracle, engine)
    order = [v for _, batch in run.state.removals for v in batch]
    order.extend(run.state.survivors())
    return OrderingResult(order, orient_and_max_outdegree(g, order))

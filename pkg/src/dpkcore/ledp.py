"""Local edge-DP k-core decomposition by level progression.

The protocol runs ``4 * ceil(log2 n)^2`` rounds. Vertices start at level 0.
In round ``r`` every vertex still at level ``r`` (the frontier) counts its
neighbors that are also at level ``r``, adds ``Lap(8/ε)`` and compares the
result with ``(1+ψ)^floor(r / (2 ceil(log2 n))) + offset``, where the offset
is one ``Lap(4/ε)`` draw the vertex keeps for the whole protocol. It releases
bit 1 (move up a level) when the noisy count is above that threshold and 0
(stop for good) otherwise. The curator only ever sees those bits.

Each simulated vertex is a :class:`LocalNode` holding its own adjacency list
and its own noise stream, and it reads nothing except the public levels
reconstructed from earlier rounds. That makes every released bit replayable
from the transcript prefix plus the vertex's local data.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Sequence

from dpkcore.graph import Graph
from dpkcore.mechanisms import NoiseOracle

RANDOMIZER_ID = "noisy-frontier-degree/laplace"


def log2_ceil(n: int) -> int:
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    return max(1, math.ceil(math.log2(n)))


def round_count(n: int) -> int:
    return 4 * log2_ceil(n) ** 2


def level_threshold(r: int, n: int, psi: float) -> float:
    """Deterministic part of the round-``r`` threshold, ``(1+ψ)^floor(r / (2 ceil(log2 n)))``."""
    return (1.0 + psi) ** (r // (2 * log2_ceil(n)))


@dataclass(frozen=True)
class LedpConfig:
    epsilon: float
    eta: float

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if not self.eta > 0:
            raise ValueError(f"eta must be positive, got {self.eta}")

    @property
    def psi(self) -> float:
        return 0.1 * self.eta

    @property
    def lam(self) -> float:
        eta = self.eta
        return 2.0 * (30.0 - eta) * eta / (eta + 10.0) ** 2

    @property
    def offset_scale(self) -> float:
        return 4.0 / self.epsilon

    @property
    def count_scale(self) -> float:
        return 8.0 / self.epsilon


@dataclass(frozen=True)
class RoundRecord:
    round: int
    queried: tuple[int, ...]
    randomizer: str
    epsilon: float
    bits: tuple[int, ...]


@dataclass
class Transcript:
    n: int
    records: list[RoundRecord]

    def __len__(self) -> int:
        return len(self.records)

    def levels_before(self, r: int) -> list[int]:
        """Public levels ``L_r`` rebuilt from the first ``r`` records."""
        levels = [0] * self.n
        for rec in self.records[:r]:
            for v, b in zip(rec.queried, rec.bits):
                levels[v] += b
        return levels

    def level_history(self) -> list[list[int]]:
        """``L_0, ..., L_R`` for ``R = len(self)``."""
        levels = [0] * self.n
        history = [levels.copy()]
        for rec in self.records:
            for v, b in zip(rec.queried, rec.bits):
                levels[v] += b
            history.append(levels.copy())
        return history

    def to_jsonl(self) -> str:
        return "".join(json.dumps(asdict(rec), sort_keys=True) + "\n" for rec in self.records)

    @classmethod
    def from_jsonl(cls, n: int, text: str) -> Transcript:
        records = []
        for line in text.splitlines():
            if line.strip():
                d = json.loads(line)
                records.append(
                    RoundRecord(d["round"], tuple(d["queried"]), d["randomizer"], d["epsilon"], tuple(d["bits"]))
                )
        return cls(n, records)


class LocalNode:
    """One vertex running its local randomizer on its own adjacency list."""

    def __init__(self, vid: int, neighbors: Sequence[int], config: LedpConfig, oracle: NoiseOracle):
        self.vid = vid
        self.neighbors = tuple(neighbors)
        self.config = config
        self.oracle = oracle
        self.offset = oracle.laplace(config.offset_scale)

    def release(self, r: int, public_levels: Sequence[int], threshold: float) -> int:
        up = sum(1 for j in self.neighbors if public_levels[j] == r)
        noisy = up + self.oracle.laplace(self.config.count_scale)
        return 0 if noisy <= threshold + self.offset else 1


def make_nodes(g: Graph, config: LedpConfig, oracle: NoiseOracle) -> list[LocalNode]:
    return [LocalNode(i, g.adj[i], config, oracle.spawn(i)) for i in range(g.n)]


def final_level_index(history: list[list[int]], i: int) -> int:
    """Highest ``l`` with ``L_l[i] == l``; 0 when the vertex never rose."""
    best = 0
    for lvl, levels in enumerate(history):
        if levels[i] == lvl:
            best = lvl
    return best


def estimate_from_level(level: int, n: int, config: LedpConfig) -> float:
    psi = config.psi
    group = 4 * math.ceil(math.log(n) / math.log1p(psi))
    return (2.0 + config.lam) * (1.0 + psi) ** max((level + 1) // group - 1, 0)


@dataclass
class LedpResult:
    estimates: list[float]
    transcript: Transcript
    final_levels: list[int]


def ledp_core_numbers(g: Graph, config: LedpConfig, oracle: NoiseOracle | None = None) -> LedpResult:
    """Run the level protocol and turn final levels into core-number estimates."""
    n = g.n
    if n < 2:
        raise ValueError(f"the protocol needs n >= 2, got {n}")
    if oracle is None:
        oracle = NoiseOracle()
    nodes = make_nodes(g, config, oracle)
    levels = [0] * n
    records = []
    for r in range(round_count(n)):
        threshold = level_threshold(r, n, config.psi)
        queried = tuple(i for i in range(n) if levels[i] == r)
        # Nodes see the same public snapshot; updates land at the round barrier.
        bits = tuple(nodes[i].release(r, levels, threshold) for i in queried)
        records.append(RoundRecord(r, queried, RANDOMIZER_ID, config.epsilon, bits))
        for i, b in zip(queried, bits):
            levels[i] += b
    transcript = Transcript(n, records)
    history = transcript.level_history()
    final = [final_level_index(history, i) for i in range(n)]
    return LedpResult([estimate_from_level(lv, n, config) for lv in final], transcript, final)


def replay_bits(g: Graph, config: LedpConfig, oracle: NoiseOracle, transcript: Transcript) -> list[tuple[int, ...]]:
    """Recompute every released bit from node-local data and the transcript prefix.

    ``oracle`` must be the same parent oracle (seed and mode) used for the
    original run; each node's stream is rebuilt from it independently.
    """
    nodes = make_nodes(g, config, oracle)
    out = []
    for rec in transcript.records:
        public = transcript.levels_before(rec.round)
        threshold = level_threshold(rec.round, g.n, config.psi)
        out.append(tuple(nodes[i].release(rec.round, public, threshold) for i in rec.queried))
    return out


@dataclass(frozen=True)
class InvariantCounts:
    upper_ok: int
    upper_total: int
    lower_ok: int
    lower_total: int


def check_level_invariants(g: Graph, final_levels: Sequence[int], config: LedpConfig, c: float = 120.0) -> InvariantCounts:
    """Count vertices satisfying the per-level degree bounds.

    Upper: a vertex frozen at level ``r < R - 1`` has at most
    ``threshold(r) + c ln(n)/ε`` neighbors at levels ``>= r``. Lower: a vertex
    at level ``r > 0`` has at least ``threshold(r-1) - c ln(n)/ε`` neighbors
    at levels ``>= r - 1``.
    """
    n = g.n
    slack = c * math.log(n) / config.epsilon
    last = round_count(n) - 1
    adj = g.adj
    up_ok = up_tot = lo_ok = lo_tot = 0
    for i, r in enumerate(final_levels):
        if r < last:
            up_tot += 1
            cnt = sum(1 for j in adj[i] if final_levels[j] >= r)
            up_ok += cnt <= level_threshold(r, n, config.psi) + slack
        if r > 0:
            lo_tot += 1
            cnt = sum(1 for j in adj[i] if final_levels[j] >= r - 1)
            lo_ok += cnt >= level_threshold(r - 1, n, config.psi) - slack
    return InvariantCounts(up_ok, up_tot, lo_ok, lo_tot)


def check_round_invariants(g: Graph, transcript: Transcript, config: LedpConfig, c: float = 120.0) -> InvariantCounts:
    """Same bounds as :func:`check_level_invariants`, checked at every round.

    After round ``r`` a vertex at level ``l < r + 1`` has stopped for good, so
    the upper bound applies to it using the levels at that point; the lower
    bound applies to every vertex above level 0. Counts are over
    (vertex, round) pairs.
    """
    n = g.n
    slack = c * math.log(n) / config.epsilon
    psi = config.psi
    adj = g.adj
    up_ok = up_tot = lo_ok = lo_tot = 0
    history = transcript.level_history()
    for r, levels in enumerate(history[1:], start=1):
        for i, lvl in enumerate(levels):
            if lvl < r:
                up_tot += 1
                cnt = sum(1 for j in adj[i] if levels[j] >= lvl)
                up_ok += cnt <= level_threshold(lvl, n, psi) + slack
            if lvl > 0:
                lo_tot += 1
                cnt = sum(1 for j in adj[i] if levels[j] >= lvl - 1)
                lo_ok += cnt >= level_threshold(lvl - 1, n, psi) - slack
    return InvariantCounts(up_ok, up_tot, lo_ok, lo_tot)

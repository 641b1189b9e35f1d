"""Test-only reference implementations and the shared graph corpus.

Nothing here calls into the code paths it is used to check.
"""

from __future__ import annotations

import itertools
import math

from dpkcore.graph import Graph, from_edge_list, generate


def petersen() -> Graph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    return from_edge_list(outer + inner + spokes, 10)


def k4_with_pendant() -> Graph:
    return from_edge_list(list(itertools.combinations(range(4), 2)) + [(3, 4)], 5)


def corpus() -> list[tuple[str, Graph]]:
    """50 graphs: paths, cycles, stars, cliques and G(n, p) with n <= 200."""
    graphs = []
    for n in (1, 2, 5, 10, 30, 100):
        graphs.append((f"path{n}", generate("path", n)))
    for n in (3, 4, 10, 50, 200):
        graphs.append((f"cycle{n}", generate("cycle", n)))
    for n in (2, 5, 20, 100):
        graphs.append((f"star{n}", generate("star", n)))
    for n in (1, 2, 3, 4, 8, 15):
        graphs.append((f"complete{n}", generate("complete", n)))
    for n in (8, 12, 15, 40, 100, 200):
        for p in (0.05, 0.2, 0.5):
            graphs.append((f"gnp{n}_{p}", generate("gnp", n, seed=n, p=p)))
    for i, n in enumerate((10, 13, 14, 25, 60, 150, 180, 200, 120, 90, 75)):
        p = (0.05, 0.2, 0.5)[i % 3]
        graphs.append((f"gnp{n}_{p}_s{i}", generate("gnp", n, seed=1000 + i, p=p)))
    assert len(graphs) == 50
    return graphs


def classical_core_numbers(g: Graph) -> list[int]:
    """Literal threshold peeling: for k = 1..n drop vertices of induced degree < k."""
    n = g.n
    adj = [set(g.neighbors(v).tolist()) for v in range(n)]
    alive = set(range(n))
    labels = [0] * n
    for k in range(1, n + 1):
        while True:
            drop = {v for v in alive if len(adj[v] & alive) < k}
            if not drop:
                break
            alive -= drop
        for v in alive:
            labels[v] = k
    return labels


def brute_core_numbers(g: Graph) -> list[int]:
    """Core number from the definition: max over subsets S containing v of min degree in S."""
    n = g.n
    adj = [set(g.neighbors(v).tolist()) for v in range(n)]
    core = [0] * n
    for mask in range(1, 1 << n):
        members = [v for v in range(n) if mask >> v & 1]
        s = set(members)
        mindeg = min(len(adj[v] & s) for v in members)
        for v in members:
            core[v] = max(core[v], mindeg)
    return core


def laplace_cdf_ref(t: float, b: float) -> float:
    # Integral of the density (1/2b) exp(-|x|/b) from -inf to t.
    return 0.5 * math.exp(t / b) if t < 0 else 1 - 0.5 * math.exp(-t / b)


def exact_survivor_distribution(g: Graph, offsets, k: float, scale: float) -> dict[frozenset, float]:
    """Exact law of the round-synchronous peel's survivor set, by subset enumeration.

    From active set A each vertex leaves independently with probability
    Pr[d_A(v) + Lap(scale) <= k + offset(v)]; the process stops at the first
    round in which nobody leaves.
    """
    n = g.n
    adj = [set(g.neighbors(v).tolist()) for v in range(n)]
    full = frozenset(range(n))
    mass = {full: 1.0}
    out: dict[frozenset, float] = {}
    for size in range(n, -1, -1):
        for a in [s for s in mass if len(s) == size]:
            pa = mass.pop(a)
            members = sorted(a)
            q = {v: laplace_cdf_ref(k + offsets[v] - len(adj[v] & a), scale) for v in members}
            stay_all = math.prod(1 - q[v] for v in members)
            out[a] = out.get(a, 0.0) + pa * stay_all
            for r in range(1, len(members) + 1):
                for gone in itertools.combinations(members, r):
                    gs = set(gone)
                    pr = math.prod(q[v] if v in gs else 1 - q[v] for v in members)
                    if pr:
                        nxt = a - gs
                        mass[nxt] = mass.get(nxt, 0.0) + pa * pr
    return out

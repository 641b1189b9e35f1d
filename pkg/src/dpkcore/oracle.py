"""Exact, non-private ground truth for core numbers and density."""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from dpkcore.graph import Graph, VertexSubset

BRUTE_FORCE_MAX_N = 20


class CapacityError(ValueError):
    pass


@dataclass(frozen=True)
class DensityResult:
    subset: VertexSubset
    density: Fraction


def _bucket_peel(g: Graph) -> tuple[list[int], list[int]]:
    """Min-degree peel with a bucket queue (Batagelj-Zaversnik).

    Returns the core numbers and the removal order. Among vertices of equal
    current degree the smallest id is removed first.
    """
    n = g.n
    adj = g.adj
    deg = [len(a) for a in adj]
    max_deg = max(deg, default=0)
    # One lazy min-heap per degree value; stale entries are skipped on pop.
    buckets: list[list[int]] = [[] for _ in range(max_deg + 1)]
    for v in range(n):
        buckets[deg[v]].append(v)
    for b in buckets:
        heapq.heapify(b)
    removed = [False] * n
    core = [0] * n
    order = []
    cur = 0
    k = 0
    for _ in range(n):
        # Degrees only drop by one per removal, so the minimum can fall at most
        # one bucket below the one we just emptied.
        cur = max(cur - 1, 0)
        while True:
            b = buckets[cur]
            while b and (removed[b[0]] or deg[b[0]] != cur):
                heapq.heappop(b)
            if b:
                break
            cur += 1
        v = heapq.heappop(buckets[cur])
        removed[v] = True
        k = max(k, cur)
        core[v] = k
        order.append(v)
        for u in adj[v]:
            if not removed[u]:
                deg[u] -= 1
                heapq.heappush(buckets[deg[u]], u)
    return core, order


def exact_core_numbers(g: Graph) -> list[int]:
    """Core number of every vertex, in O((n + m) log n)."""
    return _bucket_peel(g)[0]


def degeneracy_ordering(g: Graph) -> list[int]:
    """Vertices in min-degree removal order (smallest id on ties).

    Orienting edges from earlier to later vertices gives max out-degree equal
    to the degeneracy.
    """
    return _bucket_peel(g)[1]


def degeneracy(g: Graph) -> int:
    return max(exact_core_numbers(g), default=0)


def induced_edge_count(g: Graph, members: set[int] | frozenset[int]) -> int:
    adj = g.adj
    return sum(1 for v in members for u in adj[v] if u in members) // 2


def density(g: Graph, s: VertexSubset) -> Fraction:
    if len(s) == 0:
        raise ValueError("density of an empty subset is undefined")
    return Fraction(induced_edge_count(g, s.members), len(s))


def brute_force_densest(g: Graph) -> DensityResult:
    """Exhaustive densest subgraph for ``n <= 20``.

    Ties go to the smaller subset, then to the lexicographically smallest
    sorted member list.
    """
    n = g.n
    if n > BRUTE_FORCE_MAX_N:
        raise CapacityError(f"brute_force_densest supports n <= {BRUTE_FORCE_MAX_N}, got {n}")
    if n == 0:
        raise ValueError("graph has no vertices")
    nbr_mask = [0] * n
    for u, v in g.edges():
        nbr_mask[u] |= 1 << v
        nbr_mask[v] |= 1 << u
    # Induced edge counts by DP over masks: e(S) = e(S - low) + |N(low) & S|.
    size = 1 << n
    edges = [0] * size
    best_e, best_k, best_mask = 0, 1, 0
    for mask in range(1, size):
        low = (mask & -mask).bit_length() - 1
        rest = mask & (mask - 1)
        e = edges[rest] + (nbr_mask[low] & rest).bit_count()
        edges[mask] = e
        k = mask.bit_count()
        lhs, rhs = e * best_k, best_e * k
        if best_mask == 0 or lhs > rhs:
            best_e, best_k, best_mask = e, k, mask
        elif lhs == rhs and k <= best_k:
            if k < best_k or _members(mask, n) < _members(best_mask, n):
                best_e, best_k, best_mask = e, k, mask
    sub = VertexSubset.of(g, _members(best_mask, n))
    return DensityResult(sub, density(g, sub))


def _members(mask: int, n: int) -> list[int]:
    return [i for i in range(n) if mask >> i & 1]


def orient_and_max_outdegree(g: Graph, order: Sequence[int]) -> int:
    """Max out-degree when each edge points from the earlier vertex to the later."""
    pos = _positions(g, order)
    adj = g.adj
    return max((sum(1 for u in adj[v] if pos[u] > pos[v]) for v in range(g.n)), default=0)


def out_degrees(g: Graph, order: Sequence[int]) -> list[int]:
    pos = _positions(g, order)
    adj = g.adj
    return [sum(1 for u in adj[v] if pos[u] > pos[v]) for v in range(g.n)]


def _positions(g: Graph, order: Sequence[int]) -> list[int]:
    if len(order) != g.n or sorted(order) != list(range(g.n)):
        raise ValueError("order must be a permutation of 0..n-1")
    pos = [0] * g.n
    for i, v in enumerate(order):
        pos[v] = i
    return pos

"""Undirected simple graphs, edge-list I/O, generators and edge-neighbors."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np


class GraphInputError(ValueError):
    """Malformed graph input (bad ids, self-loops, unparsable lines)."""


class Graph:
    """Immutable undirected simple graph on vertices ``0..n-1``.

    Adjacency is stored in CSR form (``indptr``/``indices`` with sorted
    neighbor runs). ``adj`` exposes the same data as Python lists, which is
    what the peeling loops iterate over.
    """

    __slots__ = ("n", "m", "indptr", "indices", "_adj")

    def __init__(self, n: int, indptr: np.ndarray, indices: np.ndarray):
        self.n = int(n)
        self.indptr = indptr
        self.indices = indices
        self.indptr.setflags(write=False)
        self.indices.setflags(write=False)
        self.m = int(len(indices)) // 2
        self._adj: list[list[int]] | None = None

    @property
    def adj(self) -> list[list[int]]:
        if self._adj is None:
            flat = self.indices.tolist()
            ptr = self.indptr.tolist()
            self._adj = [flat[ptr[v]:ptr[v + 1]] for v in range(self.n)]
        return self._adj

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def degree(self, v: int) -> int:
        return int(self.indptr[v + 1] - self.indptr[v])

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def has_edge(self, u: int, v: int) -> bool:
        nbrs = self.neighbors(u)
        i = np.searchsorted(nbrs, v)
        return bool(i < len(nbrs) and nbrs[i] == v)

    def edges(self) -> list[tuple[int, int]]:
        """Edges as ``(u, v)`` pairs with ``u < v``, in lexicographic order."""
        src = np.repeat(np.arange(self.n), np.diff(self.indptr))
        mask = src < self.indices
        return list(zip(src[mask].tolist(), self.indices[mask].tolist()))

    def edge_array(self) -> np.ndarray:
        src = np.repeat(np.arange(self.n, dtype=np.int64), np.diff(self.indptr))
        mask = src < self.indices
        return np.stack([src[mask], self.indices[mask]], axis=1)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
        )

    def __hash__(self) -> int:
        return hash((self.n, self.indices.tobytes(), self.indptr.tobytes()))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


@dataclass(frozen=True)
class VertexSubset:
    members: frozenset[int]
    parent: Graph

    def __post_init__(self):
        bad = [v for v in self.members if not 0 <= v < self.parent.n]
        if bad:
            raise GraphInputError(f"vertex ids out of range for n={self.parent.n}: {sorted(bad)[:5]}")

    @classmethod
    def of(cls, g: Graph, members: Iterable[int]) -> VertexSubset:
        return cls(frozenset(int(v) for v in members), g)

    @classmethod
    def all(cls, g: Graph) -> VertexSubset:
        return cls(frozenset(range(g.n)), g)

    def __contains__(self, v: object) -> bool:
        return v in self.members

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[int]:
        return iter(sorted(self.members))

    def sorted(self) -> list[int]:
        return sorted(self.members)


def _from_array(edges: np.ndarray, n: int) -> Graph:
    """Build a graph from an ``(k, 2)`` int array of already validated pairs."""
    if len(edges) == 0:
        return Graph(n, np.zeros(n + 1, dtype=np.int64), np.zeros(0, dtype=np.int64))
    lo = np.minimum(edges[:, 0], edges[:, 1]).astype(np.int64)
    hi = np.maximum(edges[:, 0], edges[:, 1]).astype(np.int64)
    key = np.unique(lo * n + hi)
    lo, hi = key // n, key % n
    src = np.concatenate([lo, hi])
    dst = np.concatenate([hi, lo])
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
    return Graph(n, indptr, dst)


def from_edge_list(pairs: Sequence[tuple[int, int]] | np.ndarray, n: int) -> Graph:
    """Build a graph from ``(u, v)`` pairs, deduplicating and symmetrizing.

    Raises:
        GraphInputError: if an id is outside ``0..n-1`` or a pair is a self-loop.
    """
    if n < 0:
        raise GraphInputError(f"vertex count must be non-negative, got {n}")
    edges = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    if len(edges):
        if edges.min() < 0 or edges.max() >= n:
            bad = edges[(edges < 0).any(axis=1) | (edges >= n).any(axis=1)][0]
            raise GraphInputError(f"edge {tuple(bad.tolist())} has an id outside 0..{n - 1}")
        loops = edges[:, 0] == edges[:, 1]
        if loops.any():
            v = int(edges[loops][0, 0])
            raise GraphInputError(f"self-loop at vertex {v}")
    return _from_array(edges, n)


def induced_degree(g: Graph, v: int, active: VertexSubset) -> int:
    """Number of neighbors of ``v`` inside ``active``."""
    if v not in active:
        raise ValueError(f"vertex {v} is not in the active subset")
    members = active.members
    return sum(1 for u in g.adj[v] if u in members)


def with_pair_toggled(g: Graph, u: int, v: int) -> Graph:
    """The graph differing from ``g`` exactly in the unordered pair ``{u, v}``."""
    if u == v:
        raise GraphInputError("cannot toggle a self-loop")
    edges = g.edges()
    pair = (min(u, v), max(u, v))
    if g.has_edge(u, v):
        edges.remove(pair)
    else:
        edges.append(pair)
    return from_edge_list(edges, g.n)


def edge_neighbors_of(g: Graph) -> Iterator[Graph]:
    """Yield every edge-neighboring graph, one per unordered vertex pair."""
    for u, v in itertools.combinations(range(g.n), 2):
        yield with_pair_toggled(g, u, v)


def are_edge_neighbors(g: Graph, h: Graph) -> bool:
    if g.n != h.n:
        return False
    return len(set(g.edges()) ^ set(h.edges())) == 1


# ---------------------------------------------------------------------------
# Generators

MODELS = ("path", "cycle", "complete", "star", "gnp", "barbell")


def _gnp_edges(n: int, p: float, rng: np.random.Generator) -> np.ndarray:
    total = n * (n - 1) // 2
    if total == 0 or p == 0.0:
        return np.zeros((0, 2), dtype=np.int64)
    if n <= 2048:
        iu, ju = np.triu_indices(n, k=1)
        keep = rng.random(len(iu)) < p
        return np.stack([iu[keep], ju[keep]], axis=1)
    # Sparse regime: the edge count is binomial and, given the count, the edge
    # set is a uniform subset of the C(n, 2) pairs.
    count = int(rng.binomial(total, p))
    chosen = np.zeros(0, dtype=np.int64)
    while len(chosen) < count:
        extra = rng.integers(0, total, size=int((count - len(chosen)) * 1.1) + 16)
        chosen = np.unique(np.concatenate([chosen, extra]))
    if len(chosen) > count:
        chosen = rng.choice(chosen, size=count, replace=False)
    # Invert the row-major index of the strict upper triangle.
    rows = np.arange(n - 1, dtype=np.int64)
    row_start = rows * (2 * n - rows - 1) // 2
    i = np.searchsorted(row_start, chosen, side="right") - 1
    j = chosen - row_start[i] + i + 1
    return np.stack([i, j], axis=1)


def generate(model: str, n: int, seed: int | None = None, p: float | None = None) -> Graph:
    """Deterministic synthetic graph.

    ``model`` is one of :data:`MODELS`; ``gnp`` needs ``p``. Barbell is two
    cliques on ``n // 2`` and ``n - n // 2`` vertices joined by one edge.
    """
    if n < 1:
        raise GraphInputError(f"n must be >= 1, got {n}")
    if model == "path":
        edges = [(i, i + 1) for i in range(n - 1)]
    elif model == "cycle":
        edges = [(i, (i + 1) % n) for i in range(n)] if n >= 3 else [(i, i + 1) for i in range(n - 1)]
    elif model == "complete":
        edges = list(itertools.combinations(range(n), 2))
    elif model == "star":
        edges = [(0, i) for i in range(1, n)]
    elif model == "barbell":
        a = n // 2
        edges = list(itertools.combinations(range(a), 2))
        edges += list(itertools.combinations(range(a, n), 2))
        if 0 < a < n:
            edges.append((a - 1, a))
    elif model == "gnp":
        if p is None or not (0.0 <= p <= 1.0) or math.isnan(p):
            raise GraphInputError(f"gnp needs 0 <= p <= 1, got {p}")
        rng = np.random.default_rng(seed)
        return _from_array(_gnp_edges(n, p, rng), n)
    else:
        raise GraphInputError(f"unknown model {model!r}; expected one of {MODELS}")
    return from_edge_list(edges, n)


def parse_generator_spec(text: str, seed: int | None = None) -> Graph:
    """Parse ``model:n`` or ``gnp:n:p`` (e.g. ``gnp:1000:0.01``)."""
    parts = text.split(":")
    try:
        model, n = parts[0], int(parts[1])
        p = float(parts[2]) if len(parts) > 2 else None
    except (IndexError, ValueError) as exc:
        raise GraphInputError(f"bad generator spec {text!r}; expected model:n[:p]") from exc
    return generate(model, n, seed=seed, p=p)


# ---------------------------------------------------------------------------
# Edge-list text format


def parse_edge_list(text: str, relabel: bool = False) -> tuple[Graph, dict[int, int]]:
    """Parse the edge-list text format.

    One edge per line as two integers; ``#`` lines are comments, except an
    optional ``# n=<count>`` header fixing the vertex count. Without a header,
    ``n`` is the largest id plus one. With ``relabel=True`` the distinct ids
    are mapped to ``0..k-1`` in increasing order.

    Returns:
        The graph and the mapping from original ids to dense ids.
    """
    n_header = None
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip().replace(" ", "")
            if body.startswith("n="):
                try:
                    n_header = int(body[2:])
                except ValueError as exc:
                    raise GraphInputError(f"line {lineno}: bad header {raw!r}") from exc
            continue
        fields = line.split()
        try:
            u, v = int(fields[0]), int(fields[1])
        except (IndexError, ValueError) as exc:
            raise GraphInputError(f"line {lineno}: expected two integer ids, got {raw!r}") from exc
        if u < 0 or v < 0:
            raise GraphInputError(f"line {lineno}: negative vertex id")
        pairs.append((u, v))

    if relabel:
        ids = sorted({x for e in pairs for x in e})
        mapping = {old: new for new, old in enumerate(ids)}
        n = max(len(ids), n_header or 0)
        pairs = [(mapping[u], mapping[v]) for u, v in pairs]
    else:
        n = n_header if n_header is not None else (max((max(e) for e in pairs), default=-1) + 1)
        mapping = {i: i for i in range(n)}
    return from_edge_list(pairs, n), mapping


def serialize_edge_list(g: Graph) -> str:
    lines = [f"# n={g.n}"]
    lines.extend(f"{u} {v}" for u, v in g.edges())
    return "\n".join(lines) + "\n"


def read_edge_list(path: str | Path, relabel: bool = False) -> tuple[Graph, dict[int, int]]:
    return parse_edge_list(Path(path).read_text(), relabel=relabel)


def write_edge_list(g: Graph, path: str | Path) -> None:
    Path(path).write_text(serialize_edge_list(g))

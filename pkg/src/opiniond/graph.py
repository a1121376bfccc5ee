"""Undirected simple graph with O(1) neighbour sampling and edge rewiring."""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .errors import InvalidParameterError, PreconditionError
from .rng import RandomStream


class AdaptiveGraph:
    """Undirected simple graph on nodes ``0..n-1``.

    Each neighbourhood is an index-backed set: a list holding the neighbours
    plus a dict from neighbour to its list position. Membership, insertion,
    deletion (swap with the last element) and uniform sampling are all O(1)
    expected. The list order is part of the state, since sampling indexes
    into it.
    """

    def __init__(self, node_count: int):
        if node_count < 1:
            raise InvalidParameterError("node_count must be positive")
        self.node_count = int(node_count)
        self._nbrs: list[list[int]] = [[] for _ in range(self.node_count)]
        self._index: list[dict[int, int]] = [{} for _ in range(self.node_count)]
        self.edge_count = 0

    @classmethod
    def from_edges(cls, node_count: int, edges: Iterable[tuple[int, int]]) -> "AdaptiveGraph":
        g = cls(node_count)
        for u, v in edges:
            g.add_edge(int(u), int(v))
        return g

    @classmethod
    def from_adjacency(cls, adjacency: list[list[int]]) -> "AdaptiveGraph":
        """Rebuild a graph keeping each neighbour list in the given order."""
        g = cls(len(adjacency))
        total = 0
        for v, row in enumerate(adjacency):
            g._nbrs[v] = [int(u) for u in row]
            g._index[v] = {u: i for i, u in enumerate(g._nbrs[v])}
            if len(g._index[v]) != len(row) or v in g._index[v]:
                raise PreconditionError(f"adjacency of node {v} has duplicates or a self-loop")
            total += len(row)
        for v in range(g.node_count):
            for u in g._nbrs[v]:
                if v not in g._index[u]:
                    raise PreconditionError(f"adjacency is not symmetric at {{{u}, {v}}}")
        g.edge_count = total // 2
        return g

    def __repr__(self) -> str:
        return f"AdaptiveGraph(node_count={self.node_count}, edge_count={self.edge_count})"

    def _check_node(self, v: int) -> None:
        if not 0 <= v < self.node_count:
            raise PreconditionError(f"node {v} out of range [0, {self.node_count})")

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._index[u]

    def degree(self, v: int) -> int:
        return len(self._nbrs[v])

    def neighbors(self, v: int) -> list[int]:
        """Neighbours of ``v`` in internal (sampling) order."""
        return list(self._nbrs[v])

    def adjacency(self) -> list[list[int]]:
        return [list(row) for row in self._nbrs]

    def degrees(self) -> np.ndarray:
        return np.fromiter((len(row) for row in self._nbrs), dtype=np.int64, count=self.node_count)

    def add_edge(self, u: int, v: int) -> None:
        self._check_node(u)
        self._check_node(v)
        if u == v:
            raise PreconditionError(f"self-loop at node {u}")
        if v in self._index[u]:
            raise PreconditionError(f"edge {{{u}, {v}}} already present")
        self._append(u, v)
        self._append(v, u)
        self.edge_count += 1

    def remove_edge(self, u: int, v: int) -> None:
        if not (0 <= u < self.node_count and v in self._index[u]):
            raise PreconditionError(f"edge {{{u}, {v}}} not present")
        self._discard(u, v)
        self._discard(v, u)
        self.edge_count -= 1

    def _append(self, u: int, v: int) -> None:
        self._index[u][v] = len(self._nbrs[u])
        self._nbrs[u].append(v)

    def _discard(self, u: int, v: int) -> None:
        row = self._nbrs[u]
        i = self._index[u].pop(v)
        last = row.pop()
        if i < len(row):
            row[i] = last
            self._index[u][last] = i

    def edges(self) -> np.ndarray:
        """Edges as an ``(m, 2)`` int array, ``u < v``, sorted lexicographically."""
        pairs = [(u, v) for u, row in enumerate(self._nbrs) for v in row if u < v]
        arr = np.array(sorted(pairs), dtype=np.int64).reshape(-1, 2)
        return arr

    def check_invariants(self) -> None:
        """Raise AssertionError if any structural invariant is broken."""
        total = 0
        for v in range(self.node_count):
            row, index = self._nbrs[v], self._index[v]
            assert v not in index, f"self-loop at {v}"
            assert len(row) == len(index) == len(set(row)), f"multi-edge at {v}"
            for i, u in enumerate(row):
                assert index[u] == i, f"stale index at {v}"
                assert v in self._index[u], f"asymmetric edge {{{u}, {v}}}"
            total += len(row)
        assert total == 2 * self.edge_count, "cached edge_count out of date"


def erdos_renyi(n: int, k_avg: float, rng: RandomStream) -> AdaptiveGraph:
    """G(n, p) random graph with edge probability ``k_avg / (n - 1)``.

    Pairs are visited row by row (``u`` ascending, then ``v > u`` ascending)
    and each consumes one uniform from ``rng``.
    """
    if n < 2:
        raise InvalidParameterError("erdos_renyi needs n >= 2")
    if not 0 <= k_avg <= n - 1:
        raise InvalidParameterError(f"k_avg must be in [0, {n - 1}], got {k_avg}")
    prob = k_avg / (n - 1)
    g = AdaptiveGraph(n)
    for u in range(n - 1):
        hits = np.flatnonzero(rng.uniforms(n - 1 - u) < prob) + (u + 1)
        for v in hits.tolist():
            g._append(u, v)
            g._append(v, u)
        g.edge_count += hits.shape[0]
    return g


def random_node(g: AdaptiveGraph, rng: RandomStream) -> int:
    return int(rng.uniform() * g.node_count)


def random_neighbor(g: AdaptiveGraph, v: int, rng: RandomStream) -> Optional[int]:
    """Uniform neighbour of ``v``, or None if ``v`` is isolated (no draw is made then)."""
    row = g._nbrs[v]
    if not row:
        return None
    return row[int(rng.uniform() * len(row))]


def rewire_edge(g: AdaptiveGraph, a: int, old: int, new: int) -> None:
    """Move edge ``{a, old}`` to ``{a, new}``."""
    g._check_node(new)
    if not g.has_edge(a, old):
        raise PreconditionError(f"edge {{{a}, {old}}} not present")
    if new == a:
        raise PreconditionError("rewiring target equals the anchor node")
    if g.has_edge(a, new):
        raise PreconditionError(f"edge {{{a}, {new}}} already present")
    g.remove_edge(a, old)
    g.add_edge(a, new)


def format_edge_list(edges: np.ndarray) -> str:
    return "".join(f"{u} {v}\n" for u, v in edges.tolist())


def write_edge_list(edges: np.ndarray, path: Path) -> None:
    Path(path).write_text(format_edge_list(edges))


def read_edge_list(path: Path) -> np.ndarray:
    text = Path(path).read_text()
    if not text.strip():
        return np.empty((0, 2), dtype=np.int64)
    return np.loadtxt(path, dtype=np.int64, ndmin=2)

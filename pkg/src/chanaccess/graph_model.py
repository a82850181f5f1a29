"""Conflict graphs, the extended (node, channel) graph and random network generation.

A network of ``N`` secondary users sharing ``M`` channels is modelled as a unit
disk conflict graph ``G``: two users conflict when their disks (radius 1, so
centre distance at most 2) intersect.  The extended graph ``H`` has one vertex
per (node, channel) pair, numbered ``k = i * M + j``.  Vertices of one node form
a clique, and ``(i, j)`` is adjacent to ``(p, j)`` whenever ``i`` and ``p``
conflict in ``G``.  Independent sets of ``H`` are exactly the feasible channel
assignments.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

UNIT_DISK_RANGE = 2.0
CONNECT_RETRIES = 1000
# sentinel hop distance for unreachable pairs; fits in int16
UNREACHABLE = 10_000


class ConnectivityError(RuntimeError):
    """Raised when a connected random network cannot be drawn within the retry budget."""


def _bfs_distances(neighbors: Sequence[Iterable[int]], source: int) -> np.ndarray:
    dist = np.full(len(neighbors), UNREACHABLE, dtype=np.int32)
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in neighbors[u]:
            if dist[v] == UNREACHABLE:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


@dataclass(frozen=True, eq=False)
class ConflictGraph:
    """Unit disk conflict graph over ``N`` nodes with ``M`` channels each."""

    positions: np.ndarray
    neighbors: tuple[frozenset[int], ...]
    num_channels: int

    @classmethod
    def from_positions(cls, positions, num_channels: int) -> "ConflictGraph":
        pos = np.asarray(positions, dtype=float).reshape(-1, 2)
        n = len(pos)
        diff = pos[:, None, :] - pos[None, :, :]
        close = np.hypot(diff[..., 0], diff[..., 1]) <= UNIT_DISK_RANGE
        np.fill_diagonal(close, False)
        neighbors = tuple(frozenset(np.flatnonzero(close[i]).tolist()) for i in range(n))
        pos.setflags(write=False)
        return cls(pos, neighbors, int(num_channels))

    @property
    def num_nodes(self) -> int:
        return len(self.neighbors)

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u in range(self.num_nodes) for v in sorted(self.neighbors[u]) if u < v]

    def degrees(self) -> np.ndarray:
        return np.array([len(nb) for nb in self.neighbors], dtype=int)

    def is_connected(self) -> bool:
        if self.num_nodes == 0:
            return True
        return bool((_bfs_distances(self.neighbors, 0) < UNREACHABLE).all())

    @cached_property
    def hop_distances(self) -> np.ndarray:
        """All-pairs hop distance matrix; unreachable pairs hold ``UNREACHABLE``."""
        n = self.num_nodes
        out = np.empty((n, n), dtype=np.int32)
        for s in range(n):
            out[s] = _bfs_distances(self.neighbors, s)
        out.setflags(write=False)
        return out


@dataclass(frozen=True, eq=False)
class ExtendedGraph:
    """The (node, channel) conflict graph; vertex ``k`` is node ``k // M`` on channel ``k % M``."""

    num_nodes: int
    num_channels: int
    neighbors: tuple[frozenset[int], ...]
    base: ConflictGraph = field(repr=False)

    @property
    def num_vertices(self) -> int:
        return self.num_nodes * self.num_channels

    def vertex(self, node: int, channel: int) -> int:
        if not (0 <= node < self.num_nodes and 0 <= channel < self.num_channels):
            raise IndexError(f"no vertex for node {node}, channel {channel}")
        return node * self.num_channels + channel

    def pair(self, k: int) -> tuple[int, int]:
        self._check(k)
        return divmod(k, self.num_channels)

    def master(self, k: int) -> int:
        self._check(k)
        return k // self.num_channels

    def _check(self, k: int) -> None:
        if not 0 <= k < self.num_vertices:
            raise IndexError(f"vertex {k} out of range [0, {self.num_vertices})")

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u in range(self.num_vertices) for v in sorted(self.neighbors[u]) if u < v]

    @cached_property
    def hop_distances(self) -> np.ndarray:
        """All-pairs hop distances in H.

        A shortest path moves along one channel through G and switches channel
        inside a node clique at most once, so ``d_H = d_G + [channels differ]``.
        This is cross-checked against plain BFS in the test-suite.
        """
        m = self.num_channels
        dg = self.base.hop_distances
        nodes = np.arange(self.num_vertices) // m
        chans = np.arange(self.num_vertices) % m
        d = dg[np.ix_(nodes, nodes)].astype(np.int32)
        d = d + (chans[:, None] != chans[None, :])
        d = np.minimum(d, UNREACHABLE).astype(np.int16)
        d.setflags(write=False)
        return d

    def ball(self, v: int, r: int) -> np.ndarray:
        """Sorted vertex ids within ``r`` hops of ``v``."""
        self._check(v)
        return np.flatnonzero(self.hop_distances[v] <= r)


@dataclass(frozen=True)
class Neighborhood:
    center: int
    radius: int
    members: frozenset[int]


def build_extended_graph(g: ConflictGraph) -> ExtendedGraph:
    n, m = g.num_nodes, g.num_channels
    if n == 0:
        raise ValueError("conflict graph has no nodes")
    if m < 1:
        raise ValueError("need at least one channel")
    nbrs: list[set[int]] = [set() for _ in range(n * m)]
    for i in range(n):
        for j in range(m):
            k = i * m + j
            nbrs[k].update(i * m + q for q in range(m) if q != j)
            nbrs[k].update(p * m + j for p in g.neighbors[i])
    return ExtendedGraph(n, m, tuple(frozenset(s) for s in nbrs), g)


def r_hop_neighborhood(h: ExtendedGraph, v: int, r: int) -> Neighborhood:
    """Exact BFS ball of radius ``r`` around ``v`` in ``h``."""
    h._check(v)
    if r < 0:
        raise ValueError("radius must be non-negative")
    seen = {v}
    frontier = [v]
    for _ in range(r):
        nxt = []
        for u in frontier:
            for w in h.neighbors[u]:
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
        if not nxt:
            break
        frontier = nxt
    return Neighborhood(v, r, frozenset(seen))


def independence_check(h: ExtendedGraph, s: Iterable[int]) -> bool:
    members = set(s)
    for u in members:
        h._check(u)
        if not h.neighbors[u].isdisjoint(members):
            return False
    return True


def channel_assignment(h: ExtendedGraph, s: Iterable[int]) -> dict[int, int]:
    """Map node -> channel for a strategy; raises if a node holds two channels."""
    out: dict[int, int] = {}
    for k in sorted(s):
        i, j = h.pair(k)
        if i in out:
            raise ValueError(f"node {i} assigned channels {out[i]} and {j}")
        out[i] = j
    return out


def square_side(n: int, target_avg_degree: float) -> float:
    # expected degree (n-1) * pi * 2^2 / L^2 ~= d, ignoring boundary effects
    return math.sqrt(4.0 * math.pi * n / target_avg_degree)


def generate_random_network(
    n: int,
    m: int,
    target_avg_degree: float,
    seed,
    require_connected: bool = True,
    max_retries: int = CONNECT_RETRIES,
) -> ConflictGraph:
    """Uniformly placed unit disk network whose expected degree is ``target_avg_degree``.

    Nodes are numbered in sweep order (by x, then y) so that consecutive ids
    are spatial neighbours; the exact solvers branch in id order and profit
    from the small search frontier.
    """
    if n < 1 or m < 1:
        raise ValueError("need n >= 1 and m >= 1")
    if target_avg_degree <= 0:
        raise ValueError("target_avg_degree must be positive")
    rng = np.random.default_rng(seed)
    side = square_side(n, target_avg_degree)
    for _ in range(max_retries):
        pos = rng.uniform(0.0, side, size=(n, 2))
        g = ConflictGraph.from_positions(pos[np.lexsort((pos[:, 1], pos[:, 0]))], m)
        if not require_connected or g.is_connected():
            return g
    raise ConnectivityError(
        f"no connected network with n={n}, d={target_avg_degree} after {max_retries} draws"
    )


def dump_graph(g: ConflictGraph) -> str:
    lines = [f"{g.num_nodes} {g.num_channels}"]
    lines += [f"pos {i} {x!r} {y!r}" for i, (x, y) in enumerate(g.positions.tolist())]
    lines += [f"edge {u} {v}" for u, v in g.edges()]
    return "\n".join(lines) + "\n"


def load_graph(text: str) -> ConflictGraph:
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not rows:
        raise ValueError("empty graph file")
    n, m = (int(x) for x in rows[0])
    pos = np.full((n, 2), np.nan)
    edges = set()
    for row in rows[1:]:
        if row[0] == "pos":
            pos[int(row[1])] = float(row[2]), float(row[3])
        elif row[0] == "edge":
            u, v = sorted((int(row[1]), int(row[2])))
            edges.add((u, v))
        else:
            raise ValueError(f"unknown record {row[0]!r}")
    if np.isnan(pos).any():
        raise ValueError("missing node positions")
    g = ConflictGraph.from_positions(pos, m)
    if set(g.edges()) != edges:
        raise ValueError("edge list disagrees with the unit disk rule for the given positions")
    return g

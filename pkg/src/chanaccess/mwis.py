"""Maximum weighted independent set solvers.

``exact_mwis`` is a branch-and-bound oracle for desk-sized instances,
``local_mwis`` is the same search applied to a bounded neighbourhood, and
``robust_ptas`` is the coordinate-free approximation scheme that grows hop
balls around the heaviest remaining vertex.

Tie-break for every exact search: zero-weight vertices are never selected, and
among maximum-weight sets the lexicographically smallest sorted member tuple
wins.  The search branches over vertices in ascending id order, trying
"include" before "exclude", so the first maximum reached is that set; later
branches are pruned unless they can strictly improve on it.

Repeated calls on one graph reuse a compiled search DAG whose states depend
only on the graph, so each call is a numpy sweep over fixed states.  Vertex
subsets that recur in local searches get the same treatment: a subset is
compiled on its second request and kept in a bounded cache.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

EXACT_SIZE_GUARD = 50
_REL_TOL = 1e-12
_SUFFIX_MIN_RUNS = 10      # below this the plain cover bound is cheaper


class OracleSizeError(ValueError):
    """Instance too large for exhaustive search."""


@dataclass(frozen=True)
class MwisResult:
    members: tuple[int, ...]
    total_weight: float

    def __len__(self):
        return len(self.members)


EMPTY = MwisResult((), 0.0)


def _as_weights(weights) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    if (w < 0).any() or np.isnan(w).any():
        raise ValueError("weights must be non-negative numbers")
    return w


def _adjacency_masks(graph) -> list[int]:
    """Neighbour bitmask per vertex, cached on the graph object when possible."""
    cache = getattr(graph, "__dict__", None)
    if cache is not None and "_adjacency_masks" in cache:
        return cache["_adjacency_masks"]
    masks = []
    for nb in graph.neighbors:
        m = 0
        for u in nb:
            m |= 1 << u
        masks.append(m)
    if cache is not None:
        cache["_adjacency_masks"] = masks
    return masks


def _runs(adj: Sequence[int], verts: Iterable[int]) -> list[list[int]]:
    """Split ascending ids into maximal runs of consecutive, pairwise adjacent ids."""
    runs: list[list[int]] = []
    run_mask = 0
    for v in verts:
        if runs and adj[v] & run_mask == run_mask:
            runs[-1].append(v)
            run_mask |= 1 << v
        else:
            runs.append([v])
            run_mask = 1 << v
    return runs


def _cross_cliques(graph) -> list[int]:
    """Static clique label per vertex, built from vertices of different runs.

    Greedy in id order: an unlabelled vertex opens a clique that absorbs every
    later unlabelled vertex adjacent to all members and from a run not yet
    represented.  In the extended graph the runs are the per-node cliques, so
    these are single-channel cliques spanning several nodes.
    """
    cache = getattr(graph, "__dict__", None)
    if cache is not None and "_cross_cliques" in cache:
        return cache["_cross_cliques"]
    adj = _adjacency_masks(graph)
    run_of = [0] * len(adj)
    for i, run in enumerate(_runs(adj, range(len(adj)))):
        for v in run:
            run_of[v] = i
    label = [-1] * len(adj)
    for v in range(len(adj)):
        if label[v] >= 0:
            continue
        label[v] = v
        common = adj[v]
        used = {run_of[v]}
        for u in range(v + 1, len(adj)):
            if label[u] < 0 and common >> u & 1 and run_of[u] not in used:
                label[u] = v
                common &= adj[u]
                used.add(run_of[u])
    if cache is not None:
        cache["_cross_cliques"] = label
    return label


def _solve(graph, w: np.ndarray, vertices: Iterable[int]) -> MwisResult:
    verts = sorted(int(v) for v in set(vertices) if w[v] > 0)
    if not verts:
        return EMPTY
    adj = _adjacency_masks(graph)
    wt = {v: float(w[v]) for v in verts}

    # Runs of consecutive ids that are pairwise adjacent.  Choosing at most one
    # vertex per run keeps the include-first order over single vertices.
    runs = _runs(adj, verts)
    masks = [sum(1 << v for v in run) for run in runs]
    by_weight = [sorted(run, key=lambda v: -wt[v]) for run in runs]
    nruns = len(runs)
    label = _cross_cliques(graph)
    run_top: dict[int, float] = {}
    tol = _REL_TOL * max(1.0, sum(wt.values()))
    # rest[k]: optimum over runs k.. alone, filled back to front ("Russian doll")
    rest = [0.0] * (nruns + 1)
    best_w = 0.0
    best: list[int] = []
    chosen: list[int] = []
    record = False

    def bound(c: int, avail: int) -> float:
        # Best split: clique cover of runs c..k-1 plus the known optimum of runs k..
        # The cover counts a run's best available vertex, except that lone
        # survivors of runs share their cross-run clique.
        ub = rest[c]
        prefix = 0.0
        lone: dict[int, float] = {}
        for cc in range(c, nruns):
            bits = avail & masks[cc]
            if not bits:
                continue
            if bits & (bits - 1):
                top = run_top.get(bits)
                if top is None:
                    top = run_top[bits] = next(wt[v] for v in by_weight[cc] if bits >> v & 1)
                prefix += top
            else:
                u = bits.bit_length() - 1
                old = lone.get(label[u], 0.0)
                if wt[u] > old:
                    lone[label[u]] = wt[u]
                    prefix += wt[u] - old
            if prefix + rest[cc + 1] < ub:
                ub = prefix + rest[cc + 1]
        return ub

    def dfs(c: int, avail: int, cur: float) -> None:
        nonlocal best_w, best
        while c < nruns and not avail & masks[c]:
            c += 1
        if c == nruns:
            if cur > best_w + tol:
                best_w = cur
                if record:
                    best = chosen.copy()
            return
        if cur + bound(c, avail) <= best_w + tol:
            return
        # value passes only need the optimum, so try heavy vertices first
        for v in runs[c] if record else by_weight[c]:
            if avail >> v & 1:
                chosen.append(v)
                dfs(c + 1, avail & ~adj[v], cur + wt[v])
                chosen.pop()
        dfs(c + 1, avail & ~masks[c], cur)

    limit = sys.getrecursionlimit()
    if nruns + 100 > limit:
        sys.setrecursionlimit(nruns + 100)
    try:
        # Values only: each suffix improves on the next one only through a
        # vertex of its first run.
        if nruns >= _SUFFIX_MIN_RUNS:
            tail = 0
            for k in range(nruns - 1, -1, -1):
                tail |= masks[k]
                best_w = rest[k + 1]
                for v in runs[k]:
                    dfs(k + 1, tail & ~adj[v], wt[v])
                rest[k] = best_w
            # Lexicographic pass: the first set in include-first order that
            # reaches the optimum found above.
            best_w = rest[0] - 2 * tol
        else:
            rest[:nruns] = [math.inf] * nruns
            best_w = -1.0
        record = True
        dfs(0, sum(masks), 0.0)
    finally:
        sys.setrecursionlimit(limit)
    return MwisResult(tuple(best), float(sum(wt[v] for v in best)))


PLAN_STATE_LIMIT = 200_000


class _Plan:
    """The include-first search over a whole graph, unrolled into a DAG.

    A search state is (run, vertices still available in later runs); which
    states exist depends on the graph only, so the DAG is built once and then
    evaluated for any weight vector with a few array operations per run.
    Branch order within a state is include-ascending then exclude, so taking
    the first branch within tolerance of the best reproduces the tie-break.
    """

    def __init__(self, graph, limit: int = PLAN_STATE_LIMIT):
        adj = _adjacency_masks(graph)
        runs = _runs(adj, range(len(adj)))
        masks = [sum(1 << v for v in run) for run in runs]
        nruns = len(runs)
        future = [0] * (nruns + 1)
        for c in range(nruns - 1, -1, -1):
            future[c] = future[c + 1] | masks[c]
        width = max(len(run) for run in runs) + 1 if runs else 1

        ids: dict[tuple[int, int], int] = {(nruns, 0): 0}
        levels: list[list[int]] = [[] for _ in range(nruns)]
        child_rows: list[list[int]] = [[0] * width]
        vert_rows: list[list[int]] = [[-2] * width]

        def norm(c, avail):
            while c < nruns and not avail & masks[c]:
                c += 1
            return (c, avail) if c < nruns else (nruns, 0)

        root = norm(0, future[0])
        stack = []
        if root not in ids:
            ids[root] = 1
            child_rows.append(None)
            vert_rows.append(None)
            stack.append(root)
        while stack:
            key = stack.pop()
            c, avail = key
            sid = ids[key]
            children, verts = [], []
            for v in runs[c]:
                if avail >> v & 1:
                    children.append(norm(c + 1, avail & ~adj[v] & future[c + 1]))
                    verts.append(v)
            children.append(norm(c + 1, avail & future[c + 1]))
            verts.append(-1)
            row = []
            for ch in children:
                if ch not in ids:
                    ids[ch] = len(child_rows)
                    child_rows.append(None)
                    vert_rows.append(None)
                    stack.append(ch)
                    if len(ids) > limit:
                        raise OracleSizeError("search DAG exceeds the state limit")
                row.append(ids[ch])
            pad = width - len(row)
            child_rows[sid] = row[:-1] + [0] * pad + row[-1:]
            vert_rows[sid] = verts[:-1] + [-2] * pad + verts[-1:]
            levels[c].append(sid)

        self.root = ids[root]
        self.child = np.array(child_rows, dtype=np.int64)
        self.vert = np.array(vert_rows, dtype=np.int64)
        n = len(adj)
        slot = np.where(self.vert >= 0, self.vert, np.where(self.vert == -1, n, n + 1))
        order = [np.array(lv, dtype=np.int64) for lv in reversed(levels) if lv]
        # branch-major layout: one row per branch slot, one column per state
        self.levels = [(st, self.child[st].T.copy(), slot[st].T.copy()) for st in order]

    def solve(self, w: np.ndarray) -> MwisResult:
        pos = w > 0
        tol = _REL_TOL * max(1.0, float(w[pos].sum()))
        # slot n: exclude (0), slot n+1: padding (-inf); zero weights never picked
        ext = np.concatenate([np.where(pos, w, -np.inf), [0.0, -np.inf]])
        val = np.zeros(len(self.child))
        choice = np.zeros(len(self.child), dtype=np.int64)
        for states, child, slot in self.levels:
            cand = np.take(val, child)
            cand += np.take(ext, slot)
            top = np.maximum.reduce(cand)
            top -= tol
            # first branch within tolerance of the best: scan the slots backwards
            pick = np.full(len(states), len(cand) - 1)
            best = cand[-1].copy()
            for b in range(len(cand) - 2, -1, -1):
                hit = cand[b] >= top
                pick[hit] = b
                best[hit] = cand[b][hit]
            choice[states] = pick
            val[states] = best
        members = []
        s = self.root
        child, vert = self.child, self.vert
        while s:
            b = choice[s]
            v = vert[s, b]
            if v >= 0:
                members.append(int(v))
            s = child[s, b]
        return MwisResult(tuple(members), float(sum(float(w[v]) for v in members)))


def _plan(graph) -> _Plan | None:
    cache = getattr(graph, "__dict__", None)
    if cache is not None and "_mwis_plan" in cache:
        return cache["_mwis_plan"]
    try:
        plan = _Plan(graph)
    except OracleSizeError:
        plan = None
    if cache is not None:
        cache["_mwis_plan"] = plan
    return plan


SUBSET_PLAN_SIZES = (12, 64)       # vertex-count range worth compiling
SUBSET_PLAN_CACHE = 512
SUBSET_PLAN_STATES = 20_000


class _Induced:
    def __init__(self, graph, verts: tuple[int, ...]):
        local = {v: i for i, v in enumerate(verts)}
        self.neighbors = [{local[u] for u in graph.neighbors[v] if u in local} for v in verts]


def _subset_plan(graph, verts: tuple[int, ...]) -> _Plan | None:
    """Compiled plan of the subgraph induced by ``verts`` (ascending), cached per graph.

    A subset is compiled on its second request; one-off subsets are cheaper
    to search directly.  The relabelling is monotone, so the tie-break
    carries over unchanged.
    """
    cache = graph.__dict__.setdefault("_subset_plans", {})
    if verts in cache:
        return cache[verts]
    seen = graph.__dict__.setdefault("_subset_seen", set())
    if len(cache) >= SUBSET_PLAN_CACHE or verts not in seen:
        if len(seen) > 50 * SUBSET_PLAN_CACHE:
            seen.clear()
        seen.add(verts)
        return None
    try:
        plan = _Plan(_Induced(graph, verts), SUBSET_PLAN_STATES)
    except OracleSizeError:
        plan = None
    cache[verts] = plan
    return plan


def _solve_local(graph, w: np.ndarray, vertices: Iterable[int]) -> MwisResult:
    """``_solve`` with per-graph compiled plans for recurring mid-sized subsets."""
    verts = tuple(sorted(set(int(v) for v in vertices)))
    lo, hi = SUBSET_PLAN_SIZES
    if lo <= len(verts) <= hi and hasattr(graph, "__dict__"):
        plan = _subset_plan(graph, verts)
        if plan is not None:
            res = plan.solve(w[list(verts)])
            return MwisResult(tuple(verts[i] for i in res.members), res.total_weight)
    return _solve(graph, w, verts)


def exact_mwis(graph, weights, subset: Iterable[int] | None = None,
               max_size: int | None = EXACT_SIZE_GUARD) -> MwisResult:
    """Maximum weight independent subset of ``subset`` (default: every vertex).

    ``graph`` is anything with a ``neighbors`` sequence of vertex sets.
    Whole-graph searches go through a per-graph precompiled plan when the
    graph's search DAG is small enough, which pays off for repeated calls.
    """
    w = _as_weights(weights)
    verts = range(len(graph.neighbors)) if subset is None else sorted(set(subset))
    if max_size is not None and len(verts) > max_size:
        raise OracleSizeError(f"{len(verts)} vertices exceed the exact-search guard of {max_size}")
    if subset is None and len(w) == len(graph.neighbors):
        plan = _plan(graph)
        if plan is not None:
            return plan.solve(w)
    return _solve(graph, w, verts)


def local_mwis(graph, candidates: Iterable[int], weights) -> MwisResult:
    """Exact MWIS over one neighbourhood's candidate set.

    Unguarded: the candidate set of an r-hop ball is growth bounded, so the
    enumeration stays polynomial in the ball size.
    """
    return _solve_local(graph, _as_weights(weights), candidates)


def robust_ptas(graph, weights, epsilon: float, radii: list[int] | None = None) -> MwisResult:
    """Approximate MWIS within a factor ``1 + epsilon`` of optimum.

    Repeatedly takes the heaviest remaining vertex (smallest id on ties), grows
    its hop ball in the remaining graph while the ball optimum keeps growing by
    more than ``rho = 1 + epsilon`` per hop, keeps the optimum of the last ball,
    and deletes it together with its neighbours.  The chosen radius of every
    step is appended to ``radii`` when given.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    rho = 1.0 + epsilon
    w = _as_weights(weights)
    nbrs = graph.neighbors
    residual = set(range(len(nbrs)))
    chosen: list[int] = []
    while True:
        live = [v for v in residual if w[v] > 0]
        if not live:
            break
        v = min(live, key=lambda u: (-w[u], u))
        ball = {v}
        frontier = [v]
        best = _solve(graph, w, ball)
        r = 0
        while True:
            nxt = {u for x in frontier for u in nbrs[x] if u in residual and u not in ball}
            if not nxt:
                break
            grown = _solve(graph, w, ball | nxt)
            if grown.total_weight <= rho * best.total_weight:
                break
            ball |= nxt
            frontier = list(nxt)
            best = grown
            r += 1
        if radii is not None:
            radii.append(r)
        chosen.extend(best.members)
        removed = set(best.members)
        for x in best.members:
            removed |= nbrs[x]
        residual -= removed
    members = tuple(sorted(chosen))
    return MwisResult(members, float(sum(w[k] for k in members)))


def set_weight(weights, members: Iterable[int]) -> float:
    w = np.asarray(weights, dtype=float)
    return float(sum(w[k] for k in members))

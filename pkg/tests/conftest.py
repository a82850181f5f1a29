import numpy as np
import pytest

from chanaccess.graph_model import ConflictGraph, build_extended_graph

# three nodes in a path 0-1-2 (1-2 apart, 0 and 2 out of range), three channels
PATH3_POSITIONS = [(0.0, 0.0), (1.5, 0.0), (3.0, 0.0)]


def path_graph(n: int, m: int = 1) -> ConflictGraph:
    return ConflictGraph.from_positions([(1.5 * i, 0.0) for i in range(n)], m)


@pytest.fixture
def path3_h():
    return build_extended_graph(ConflictGraph.from_positions(PATH3_POSITIONS, 3))


def brute_force_mwis(h, w, verts=None):
    """Every independent subset; returns (max weight, lexicographically smallest argmax)."""
    verts = sorted(range(h.num_vertices) if verts is None else verts)
    verts = [v for v in verts if w[v] > 0]
    best = (0.0, ())
    tol = 1e-12 * max(1.0, float(sum(w[v] for v in verts)))

    def rec(i, chosen, total):
        nonlocal best
        if i == len(verts):
            key = tuple(chosen)
            if total > best[0] + tol or (abs(total - best[0]) <= tol and key < best[1]):
                best = (total, key)
            return
        v = verts[i]
        if not any(u in h.neighbors[v] for u in chosen):
            chosen.append(v)
            rec(i + 1, chosen, total + w[v])
            chosen.pop()
        rec(i + 1, chosen, total)

    rec(0, [], 0.0)
    return best


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

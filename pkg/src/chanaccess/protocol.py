"""Synchronous simulation of the distributed strategy-decision protocol.

Every round starts with a weight broadcast (WB) by the vertices that
transmitted in the previous round.  Then up to ``D`` mini-rounds run, each made
of LocalLeader selection (LS), local MWIS computation (LMWIS) and a local
broadcast of the decisions (LB).  Vertices move Candidate -> LocalLeader ->
Winner/Loser; Winners transmit.

Cost model per vertex and round (a message is one transmission on the
control channel):

* WB: a vertex originates or relays every broadcast weight whose source lies
  within ``2r`` hops, so the flood reaches the ``2r + 1`` ball.
* LS: likewise for every leader declaration from within ``2r`` hops.
* LB: likewise for every leader decision from within ``3r`` hops.

Mini-timeslots: ``(2r+1)^2`` for a non-empty WB (pipelined), ``2r+1`` for LS
and ``3r+1`` for LB per executed mini-round; LMWIS is local computation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from fractions import Fraction

import numpy as np

from .graph_model import ExtendedGraph
from .metrics import TimingModel
from .mwis import _solve_local

PHASES = ("WB", "LS", "LMWIS", "LB")


class Status(IntEnum):
    CANDIDATE = 0
    LOCAL_LEADER = 1
    WINNER = 2
    LOSER = 3


# plain ints for the hot loops; enum attribute access is slow
_CAND, _LEADER, _WIN, _LOSE = (int(s) for s in Status)


@dataclass(frozen=True)
class ProtocolConfig:
    """``r``: hop radius of the local MWIS; ``d``: mini-round budget (``None`` = N).

    With ``local_growth`` a leader shrinks its decision radius to the first
    ``s <= r`` where the ball optimum stops growing by more than ``1 + epsilon``.
    """

    r: int = 2
    d: int | None = 3
    epsilon: float = 0.5
    local_growth: bool = False

    def __post_init__(self):
        if self.r < 1:
            raise ValueError("r must be at least 1")
        if self.d is not None and self.d < 1:
            raise ValueError("d must be at least 1")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")

    @property
    def rho(self) -> float:
        return 1.0 + self.epsilon

    def budget(self, h: ExtendedGraph) -> int:
        return h.num_nodes if self.d is None else self.d


@dataclass
class ProtocolCosts:
    messages: np.ndarray
    timeslots: dict = field(default_factory=lambda: dict.fromkeys(PHASES, 0))
    mini_rounds_used: int = 0

    @classmethod
    def zero(cls, num_vertices: int) -> "ProtocolCosts":
        return cls(np.zeros(num_vertices, dtype=np.int64))

    def __iadd__(self, other: "ProtocolCosts") -> "ProtocolCosts":
        self.messages = self.messages + other.messages
        for k, v in other.timeslots.items():
            self.timeslots[k] = self.timeslots.get(k, 0) + v
        self.mini_rounds_used += other.mini_rounds_used
        return self

    @property
    def max_messages(self) -> int:
        return int(self.messages.max()) if self.messages.size else 0

    @property
    def total_timeslots(self) -> int:
        return sum(self.timeslots.values())


class _Topology:
    """Hop-distance masks of one extended graph for one radius."""

    def __init__(self, h: ExtendedGraph, r: int):
        d = h.hop_distances
        self.dist = d
        self.adj = d == 1
        self.within_2r1 = d <= 2 * r + 1
        self.within_2r = d <= 2 * r
        self.within_3r = d <= 3 * r
        self.balls = [[np.flatnonzero(d[v] <= s) for s in range(r + 1)] for v in range(len(d))]


def _topology(h: ExtendedGraph, r: int) -> _Topology:
    cache = h.__dict__.setdefault("_protocol_topology", {})
    if r not in cache:
        cache[r] = _Topology(h, r)
    return cache[r]


def seed_views(h: ExtendedGraph, weights, r: int) -> np.ndarray:
    """Views where every vertex knows the current weight of its ``(2r+1)`` ball."""
    topo = _topology(h, r)
    w = np.asarray(weights, dtype=float)
    return np.where(topo.within_2r1, w[None, :], np.nan)


def weight_broadcast(h: ExtendedGraph, prev_strategy, weights, r: int,
                     views: np.ndarray | None = None, refresh_all: bool = False):
    """WB phase: previous transmitters flood their new weight to their ``(2r+1)`` ball.

    ``views[v, u]`` is vertex v's copy of u's weight (NaN outside v's ball).
    Without ``views`` (first round) every vertex starts from the initial
    weights.  ``refresh_all`` lets receivers re-derive the weights of silent
    neighbours; valid when a weight is a function of statistics that only
    change when the vertex transmits, plus the global round counter.
    Returns ``(views, costs)``.
    """
    topo = _topology(h, r)
    w = np.asarray(weights, dtype=float)
    costs = ProtocolCosts.zero(h.num_vertices)
    if views is None or refresh_all:
        views = seed_views(h, w, r)
    else:
        views = views.copy()
    senders = np.asarray(sorted(prev_strategy), dtype=int)
    if senders.size and not refresh_all:
        for u in senders:
            col = topo.within_2r1[:, u]
            views[col, u] = w[u]
    if senders.size:
        costs.messages += topo.within_2r[:, senders].sum(axis=1)
        costs.timeslots["WB"] += (2 * r + 1) ** 2
    return views, costs


@dataclass
class MiniRoundResult:
    statuses: np.ndarray
    leaders: tuple[int, ...]
    radii: tuple[int, ...]
    costs: ProtocolCosts


def _leader_decision(h, topo, views, cand, v, config):
    # views[v] is finite on v's (2r+1) ball, which contains every ball used here
    wv = views[v]
    balls = topo.balls[v]

    def cands(s):
        b = balls[s]
        return b[cand[b]].tolist()

    if config.local_growth:
        best = _solve_local(h, wv, [v])
        rbar = 0
        for s in range(config.r):
            grown = _solve_local(h, wv, cands(s + 1))
            if grown.total_weight <= config.rho * best.total_weight:
                break
            best, rbar = grown, s + 1
    else:
        rbar = config.r
        best = _solve_local(h, wv, cands(rbar))
    decided = set(cands(rbar))
    winners = set(best.members)
    losers = decided - winners
    # candidates next to a new winner can no longer join the independent set
    for x in winners:
        losers.update(u for u in h.neighbors[x] if cand[u])
    return rbar, winners, losers


def run_mini_round(h: ExtendedGraph, views: np.ndarray, statuses: np.ndarray,
                   config: ProtocolConfig) -> MiniRoundResult:
    """One LS / LMWIS / LB mini-round over all vertices in lockstep."""
    r = config.r
    topo = _topology(h, r)
    statuses = np.array(statuses, dtype=np.int8)
    cand = statuses == _CAND
    costs = ProtocolCosts.zero(h.num_vertices)
    ci = np.flatnonzero(cand)
    if ci.size == 0:
        return MiniRoundResult(statuses, (), (), costs)

    # LS: leader iff (weight, -id) is maximal among candidates of its (2r+1) ball, as seen by v
    sub = views[ci][:, ci]
    own = sub.diagonal()[:, None]
    beats = (sub > own) | ((sub == own) & (ci[None, :] < ci[:, None]))
    beats &= topo.within_2r1[ci][:, ci]
    leaders = ci[~beats.any(axis=1)]
    if leaders.size == 0:
        raise AssertionError("candidates remain but no LocalLeader was elected")
    if leaders.size > 1:
        ld = topo.within_2r1[leaders][:, leaders]
        if ld.sum() > leaders.size:
            raise AssertionError("two LocalLeaders within 2r+1 hops")
    statuses[leaders] = _LEADER

    # LMWIS: every leader decides from the same snapshot
    decisions = [_leader_decision(h, topo, views, cand, int(v), config) for v in leaders]

    # LB: merge decisions; overlapping claims must agree
    marked: dict[int, int] = {}
    for v, (_, winners, losers) in zip(leaders, decisions):
        reach = topo.dist[v]
        for group, st in ((winners, _WIN), (losers, _LOSE)):
            for x in group:
                if marked.setdefault(x, st) != st:
                    raise AssertionError(f"vertex {x} marked both Winner and Loser")
                if reach[x] > 3 * r + 1:
                    raise AssertionError(f"vertex {x} outside the LB range of leader {v}")
    if marked:
        statuses[list(marked)] = list(marked.values())
    if (statuses == _LEADER).any():
        raise AssertionError("a LocalLeader left undecided")
    win = np.flatnonzero(statuses == _WIN)
    if topo.adj[win][:, win].any():
        raise AssertionError("adjacent Winners")

    costs.messages += topo.within_2r[:, leaders].sum(axis=1)
    costs.messages += topo.within_3r[:, leaders].sum(axis=1)
    costs.timeslots["LS"] += 2 * r + 1
    costs.timeslots["LB"] += 3 * r + 1
    costs.mini_rounds_used = 1
    return MiniRoundResult(statuses, tuple(int(v) for v in leaders),
                           tuple(d[0] for d in decisions), costs)


@dataclass
class Decision:
    strategy: tuple[int, ...]
    costs: ProtocolCosts
    weight_curve: list[float]           # winner weight after each executed mini-round
    leaders_per_mini_round: list[int]
    statuses: np.ndarray
    unresolved: int                     # candidates demoted to Loser at the budget


def decide_strategy(h: ExtendedGraph, weights, config: ProtocolConfig,
                    views: np.ndarray | None = None) -> Decision:
    """Run up to ``D`` mini-rounds and return the Winner set.

    ``views`` defaults to exact knowledge of the ``(2r+1)`` ball.  Candidates
    still undecided after the budget become Losers.
    """
    w = np.asarray(weights, dtype=float)
    if (w < 0).any() or np.isnan(w).any():
        raise ValueError("weights must be non-negative numbers")
    if views is None:
        views = seed_views(h, w, config.r)
    statuses = np.zeros(h.num_vertices, dtype=np.int8)
    costs = ProtocolCosts.zero(h.num_vertices)
    curve: list[float] = []
    leaders: list[int] = []
    for _ in range(config.budget(h)):
        if not (statuses == _CAND).any():
            break
        res = run_mini_round(h, views, statuses, config)
        statuses = res.statuses
        costs += res.costs
        leaders.append(len(res.leaders))
        curve.append(float(w[statuses == _WIN].sum()))
    left = statuses == _CAND
    statuses[left] = _LOSE
    strategy = tuple(np.flatnonzero(statuses == _WIN).tolist())
    return Decision(strategy, costs, curve, leaders, statuses, int(left.sum()))


class DistributedAccess:
    """Round-by-round driver: WB from the previous transmitters, then decision."""

    def __init__(self, h: ExtendedGraph, config: ProtocolConfig, refresh_all: bool = True):
        self.h = h
        self.config = config
        self.refresh_all = refresh_all
        self.views: np.ndarray | None = None
        self.prev: tuple[int, ...] = ()

    def __call__(self, weights) -> Decision:
        views, wb = weight_broadcast(self.h, self.prev, weights, self.config.r,
                                     self.views, self.refresh_all)
        decision = decide_strategy(self.h, weights, self.config, views)
        wb += decision.costs
        decision.costs = wb
        self.views, self.prev = views, decision.strategy
        return decision


@dataclass(frozen=True)
class RoundTiming:
    t_s: Fraction
    t_d: Fraction
    t_a: Fraction
    theta: Fraction


def account_round(costs: ProtocolCosts, timing: TimingModel, model: str = "fixed") -> RoundTiming:
    """Elapsed time of one round.

    ``fixed``: the decision phase always lasts ``decision_slots * t_m``.
    ``adaptive``: one slot for WB plus one per executed mini-round.
    """
    if model == "fixed":
        t_s = Fraction(timing.t_s)
    elif model == "adaptive":
        t_s = Fraction((costs.mini_rounds_used + 1) * timing.t_m)
    else:
        raise ValueError(f"unknown timing model {model!r}")
    t_d = Fraction(timing.t_d)
    t_a = t_s + t_d
    return RoundTiming(t_s, t_d, t_a, t_d / t_a)

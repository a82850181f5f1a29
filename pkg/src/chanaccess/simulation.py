"""Closed-loop simulation: index policy + strategy solver + channel streams."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .channels import ChannelModel, ChannelStreams
from .graph_model import ExtendedGraph, independence_check
from .learning import PolicyState, compute_index, estimated_weight, llr_index, update
from .mwis import exact_mwis, robust_ptas
from .protocol import DistributedAccess, ProtocolConfig

POLICIES = ("proposed", "llr")
SOLVERS = ("distributed", "centralized_ptas", "exact")


@dataclass
class RoundTrace:
    """Per-round columns of one learning run (one entry per round)."""

    strategy_size: list[int] = field(default_factory=list)
    observed: list[float] = field(default_factory=list)     # sum of sampled rates
    expected: list[float] = field(default_factory=list)     # lambda_x: sum of true means
    estimated: list[float] = field(default_factory=list)    # W_x: summed index, unplayed as 0
    messages: list[int] = field(default_factory=list)
    mini_rounds: list[int] = field(default_factory=list)
    strategies: list[tuple[int, ...]] = field(default_factory=list)
    violations: int = 0

    def __len__(self):
        return len(self.observed)


def make_solver(h: ExtendedGraph, name: str, config: ProtocolConfig) -> Callable:
    """Return ``solve(weights) -> (strategy, messages, mini_rounds)``.

    The distributed solver keeps its weight views between calls, so one
    solver instance belongs to one run.
    """
    if name == "distributed":
        access = DistributedAccess(h, config)

        def solve(w):
            d = access(w)
            return d.strategy, d.costs.max_messages, d.costs.mini_rounds_used
    elif name == "centralized_ptas":
        def solve(w):
            return robust_ptas(h, w, config.epsilon).members, 0, 0
    elif name == "exact":
        def solve(w):
            return exact_mwis(h, w, max_size=None).members, 0, 0
    else:
        raise ValueError(f"unknown solver {name!r}")
    return solve


def policy_index(policy: str, state: PolicyState, t: int, num_nodes: int) -> np.ndarray:
    if policy == "proposed":
        return compute_index(state, t)
    if policy == "llr":
        return llr_index(state, t, num_nodes)
    raise ValueError(f"unknown policy {policy!r}")


def run_learning(h: ExtendedGraph, model: ChannelModel, horizon: int, policy: str,
                 solver: str, protocol: ProtocolConfig, stream_seed,
                 update_every: int = 1, keep_strategies: bool = False) -> RoundTrace:
    """Run ``horizon`` slots of the learning loop.

    With ``update_every = y > 1`` a strategy is decided at the first slot of
    every period and reused for the remaining ``y - 1`` slots; the means and
    counts still absorb every slot's observations.
    """
    if horizon < 1 or update_every < 1:
        raise ValueError("horizon and update_every must be positive")
    streams = ChannelStreams(model, stream_seed)
    mu = model.arm_means()
    state = PolicyState(h.num_vertices)
    solve = make_solver(h, solver, protocol)
    trace = RoundTrace()
    strategy: tuple[int, ...] = ()
    est = 0.0
    msgs = mini = 0
    for t in range(1, horizon + 1):
        if (t - 1) % update_every == 0:
            index = policy_index(policy, state, t, h.num_nodes)
            strategy, msgs, mini = solve(index)
            strategy = tuple(strategy)
            if not independence_check(h, strategy):
                trace.violations += 1
            est = estimated_weight(state, index, strategy)
        else:
            msgs = mini = 0
        obs = streams.sample_arms(strategy)
        update(state, strategy, dict(zip(strategy, obs.tolist())))
        trace.strategy_size.append(len(strategy))
        trace.observed.append(float(obs.sum()))
        trace.expected.append(float(mu[list(strategy)].sum()) if strategy else 0.0)
        trace.estimated.append(est)
        trace.messages.append(msgs)
        trace.mini_rounds.append(mini)
        if keep_strategies:
            trace.strategies.append(strategy)
    return trace

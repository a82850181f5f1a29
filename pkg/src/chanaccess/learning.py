"""Per-arm bandit state, the t^(2/3) exploration index and the LLR baseline index."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .graph_model import ExtendedGraph, independence_check

# Index of a never-played arm.  Large enough that any set with more unplayed
# arms outweighs every set of played ones, while keeping float sums exact to
# well below the resolution of the learned means.
UNPLAYED_INDEX = 1e6

Strategy = tuple[int, ...]


@dataclass
class PolicyState:
    """Running mean and play count for every one of the ``K = N * M`` arms."""

    num_arms: int
    empirical_mean: np.ndarray = field(default=None)
    play_count: np.ndarray = field(default=None)
    round: int = 0

    def __post_init__(self):
        if self.empirical_mean is None:
            self.empirical_mean = np.zeros(self.num_arms)
        if self.play_count is None:
            self.play_count = np.zeros(self.num_arms, dtype=np.int64)

    def copy(self) -> "PolicyState":
        return PolicyState(self.num_arms, self.empirical_mean.copy(), self.play_count.copy(), self.round)


def compute_index(state: PolicyState, t: int) -> np.ndarray:
    """``mu + sqrt(max(ln(t^(2/3) / (K m)), 0) / m)`` per arm; unplayed arms get ``UNPLAYED_INDEX``."""
    if t < 1:
        raise ValueError("round index starts at 1")
    m = state.play_count
    played = m > 0
    out = np.full(state.num_arms, UNPLAYED_INDEX)
    mp = m[played].astype(float)
    log_term = np.maximum((2.0 / 3.0) * math.log(t) - np.log(state.num_arms * mp), 0.0)
    out[played] = state.empirical_mean[played] + np.sqrt(log_term / mp)
    return out


def llr_index(state: PolicyState, t: int, max_strategy_size: int) -> np.ndarray:
    """LLR baseline: ``mu + sqrt((L + 1) ln t / m)``."""
    if t < 1:
        raise ValueError("round index starts at 1")
    if max_strategy_size < 1:
        raise ValueError("max_strategy_size must be at least 1")
    m = state.play_count
    played = m > 0
    out = np.full(state.num_arms, UNPLAYED_INDEX)
    bonus = (max_strategy_size + 1) * math.log(t)
    out[played] = state.empirical_mean[played] + np.sqrt(bonus / m[played])
    return out


def estimated_weight(state: PolicyState, index: np.ndarray, strategy) -> float:
    """Summed index of a strategy, counting never-played arms as weight 0."""
    s = np.asarray(strategy, dtype=int)
    if s.size == 0:
        return 0.0
    vals = np.where(state.play_count[s] > 0, index[s], 0.0)
    return float(vals.sum())


def select_strategy(h: ExtendedGraph, index, solver: Callable) -> Strategy:
    """Run ``solver(h, index)`` and return the chosen independent set of arms.

    ``solver`` may return an ``MwisResult`` or any iterable of vertex ids.
    """
    out = solver(h, np.asarray(index, dtype=float))
    members = getattr(out, "members", out)
    strategy = tuple(sorted(int(k) for k in members))
    if not independence_check(h, strategy):
        raise AssertionError(f"solver returned a dependent set {strategy}")
    return strategy


def update(state: PolicyState, played, observations: Mapping[int, float] | None = None) -> PolicyState:
    """Fold the observed rates of the played arms into the running means.

    ``played`` is either a strategy (with ``observations`` a mapping arm -> rate)
    or directly a mapping arm -> rate.  Mutates and returns ``state``.
    """
    if observations is None:
        observations = dict(played)
        played = tuple(observations)
    played_set = set(int(k) for k in played)
    extra = set(int(k) for k in observations) - played_set
    if extra:
        raise ValueError(f"observations for unplayed arms {sorted(extra)}")
    missing = played_set - set(int(k) for k in observations)
    if missing:
        raise ValueError(f"no observation for played arms {sorted(missing)}")
    for k in sorted(played_set):
        x = float(observations[k])
        if not 0.0 <= x <= 1.0:
            raise ValueError(f"observation {x} for arm {k} outside [0, 1]")
        m_old = state.play_count[k]
        state.play_count[k] = m_old + 1
        state.empirical_mean[k] = (state.empirical_mean[k] * m_old + x) / (m_old + 1)
    state.round += 1
    return state

"""Per-(node, channel) i.i.d. Gaussian data rate processes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# kbps, the eight channel types of the cognitive radio setup
RATE_TABLE_KBPS = (150.0, 225.0, 300.0, 450.0, 600.0, 900.0, 1200.0, 1350.0)
DEFAULT_SIGMA = 0.1

_BUFFER = 256


@dataclass(frozen=True, eq=False)
class ChannelModel:
    """Channel-type assignment for every (node, channel) pair.

    ``assignment[i, j]`` indexes ``rate_table``; means are normalised by
    ``max_rate`` so that every mean lies in [0, 1].
    """

    rate_table: tuple[float, ...]
    assignment: np.ndarray
    sigma: float = DEFAULT_SIGMA
    max_rate: float | None = None

    def __post_init__(self):
        table = tuple(float(x) for x in self.rate_table)
        object.__setattr__(self, "rate_table", table)
        if self.max_rate is None:
            object.__setattr__(self, "max_rate", max(table))
        a = np.array(self.assignment, dtype=int, ndmin=2)
        if a.min() < 0 or a.max() >= len(table):
            raise ValueError("assignment refers to a channel type outside the rate table")
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")
        if min(table) < 0 or max(table) > self.max_rate:
            raise ValueError("rates must lie in [0, max_rate]")
        a.setflags(write=False)
        object.__setattr__(self, "assignment", a)

    @classmethod
    def random(cls, num_nodes: int, num_channels: int, seed, rate_table=RATE_TABLE_KBPS,
               sigma: float = DEFAULT_SIGMA, max_rate: float | None = None) -> "ChannelModel":
        rng = np.random.default_rng(seed)
        assignment = rng.integers(0, len(rate_table), size=(num_nodes, num_channels))
        return cls(tuple(rate_table), assignment, sigma, max_rate)

    @property
    def num_nodes(self) -> int:
        return self.assignment.shape[0]

    @property
    def num_channels(self) -> int:
        return self.assignment.shape[1]

    @property
    def means(self) -> np.ndarray:
        """Normalised mean rate of every pair, shape ``(N, M)``."""
        return np.asarray(self.rate_table)[self.assignment] / self.max_rate

    def arm_means(self) -> np.ndarray:
        """Means flattened in vertex order ``k = i * M + j``."""
        return self.means.reshape(-1)


def true_mean(model: ChannelModel, node: int, channel: int) -> float:
    return model.rate_table[model.assignment[node, channel]] / model.max_rate


def sample(model: ChannelModel, node: int, channel: int, rng: np.random.Generator) -> float:
    """One normalised rate draw, Gaussian around the pair mean and clipped to [0, 1]."""
    mu = true_mean(model, node, channel)
    return float(min(1.0, max(0.0, mu + model.sigma * rng.standard_normal())))


class ChannelStreams:
    """Independent reproducible sample streams, one per (node, channel) pair.

    The n-th draw of a pair depends only on the seed, the pair and n, so two
    policies fed from streams with the same seed see identical sequences.
    """

    def __init__(self, model: ChannelModel, seed):
        self.model = model
        self._mu = model.arm_means()
        children = np.random.SeedSequence(seed).spawn(len(self._mu))
        self._rngs = [np.random.default_rng(c) for c in children]
        self._buf = np.empty((len(self._mu), _BUFFER))
        self._pos = np.full(len(self._mu), _BUFFER, dtype=int)

    def _next_normal(self, k: int) -> float:
        if self._pos[k] == _BUFFER:
            self._buf[k] = self._rngs[k].standard_normal(_BUFFER)
            self._pos[k] = 0
        z = self._buf[k, self._pos[k]]
        self._pos[k] += 1
        return z

    def sample(self, node: int, channel: int) -> float:
        return self.sample_arm(node * self.model.num_channels + channel)

    def sample_arm(self, k: int) -> float:
        x = self._mu[k] + self.model.sigma * self._next_normal(k)
        return float(min(1.0, max(0.0, x)))

    def sample_arms(self, arms) -> np.ndarray:
        return np.array([self.sample_arm(k) for k in arms], dtype=float)

"""Regret, beta-regret, practical regret and periodic-update throughput statistics.

All quantities are in normalised rate units; multiply by the channel model's
``max_rate`` for kbps.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .mwis import EXACT_SIZE_GUARD, exact_mwis


@dataclass(frozen=True)
class TimingModel:
    """Round timing in milliseconds.

    A round is a strategy-decision phase of ``decision_slots`` mini-rounds of
    length ``t_m = 2 t_b + t_l`` followed by ``t_d`` of data transmission.
    """

    t_b: int = 100
    t_l: int = 50
    t_d: int = 1000
    decision_slots: int = 4
    y: int = 1

    def __post_init__(self):
        if min(self.t_b, self.t_l) < 0 or self.t_d <= 0:
            raise ValueError("durations must be non-negative and t_d positive")
        if self.decision_slots < 0 or self.y < 1:
            raise ValueError("decision_slots >= 0 and y >= 1 required")

    @property
    def t_m(self) -> int:
        return 2 * self.t_b + self.t_l

    @property
    def t_s(self) -> int:
        return self.decision_slots * self.t_m

    @property
    def t_a(self) -> int:
        return self.t_s + self.t_d

    @property
    def theta(self) -> Fraction:
        return Fraction(self.t_d, self.t_a)

    def period_fraction(self, y: int | None = None) -> Fraction:
        """Share of a ``y``-slot period spent transmitting: ``((y-1) t_a + t_d) / (y t_a)``."""
        y = self.y if y is None else y
        if y < 1:
            raise ValueError("y must be at least 1")
        return Fraction((y - 1) * self.t_a + self.t_d, y * self.t_a)


def oracle_optimum(h, true_means, max_size: int | None = EXACT_SIZE_GUARD) -> float:
    """Throughput of the best static strategy under the true means."""
    return exact_mwis(h, np.asarray(true_means, dtype=float).reshape(-1), max_size=max_size).total_weight


@dataclass(frozen=True)
class RegretIncrement:
    regret: float
    beta_regret: float
    practical_regret: float
    practical_beta_regret: float


def regret_step(r1: float, round_throughput: float, beta: float, theta: float) -> RegretIncrement:
    """Per-round contributions of one round with throughput ``R_x(t)``.

    beta-regret counts the distance to ``R_1 / beta`` and goes negative when
    the round beats it; the practical variants charge for the decision phase
    by crediting only ``theta * R_x(t)``.
    """
    if beta <= 0 or not 0 <= theta <= 1:
        raise ValueError("beta > 0 and theta in [0, 1] required")
    eff = theta * round_throughput
    return RegretIncrement(
        r1 - round_throughput,
        r1 / beta - round_throughput,
        r1 - eff,
        r1 / beta - eff,
    )


@dataclass(frozen=True)
class RegretSeries:
    """Cumulative regret curves of one run."""

    r1: float
    beta: float
    theta: float
    regret: np.ndarray
    beta_regret: np.ndarray
    practical_regret: np.ndarray
    practical_beta_regret: np.ndarray

    @classmethod
    def from_throughputs(cls, r1: float, throughputs, beta: float, theta: float) -> "RegretSeries":
        x = np.asarray(throughputs, dtype=float)
        if beta <= 0 or not 0 <= theta <= 1:
            raise ValueError("beta > 0 and theta in [0, 1] required")
        eff = theta * x
        return cls(
            r1, beta, theta,
            np.cumsum(r1 - x),
            np.cumsum(r1 / beta - x),
            np.cumsum(r1 - eff),
            np.cumsum(r1 / beta - eff),
        )

    def average_regret(self) -> np.ndarray:
        return self.regret / np.arange(1, len(self.regret) + 1)


@dataclass(frozen=True)
class PeriodicSeries:
    actual: np.ndarray        # R_P(z)
    estimated: np.ndarray     # W_P(z)
    actual_avg: np.ndarray    # running mean of R_P
    estimated_avg: np.ndarray  # running mean of W_P


def running_average(values) -> np.ndarray:
    """``a(z) = ((z - 1) a(z - 1) + v(z)) / z``, evaluated by the recurrence."""
    out = np.empty(len(values))
    acc = 0.0
    for z, v in enumerate(values, start=1):
        acc = ((z - 1) * acc + v) / z
        out[z - 1] = acc
    return out


def periodic_throughput(slot_throughput, period_estimates, timing: TimingModel,
                        y: int | None = None) -> PeriodicSeries:
    """Effective throughput per update period of ``y`` slots.

    Within a period the first slot loses its decision phase (credited ``t_d``)
    and the remaining ``y - 1`` slots transmit for the full ``t_a``.
    ``period_estimates`` holds the estimated strategy weight chosen at the start
    of every period.  A trailing incomplete period is dropped.
    """
    y = timing.y if y is None else y
    x = np.asarray(slot_throughput, dtype=float)
    periods = len(x) // y
    if periods * y != len(x):
        warnings.warn(f"dropping incomplete final period ({len(x) - periods * y} slots)")
    x = x[: periods * y].reshape(periods, y)
    est = np.asarray(period_estimates, dtype=float)[:periods]
    if len(est) < periods:
        raise ValueError("one estimate per complete period required")
    t_a, t_d = timing.t_a, timing.t_d
    actual = (x[:, 0] * t_d + x[:, 1:].sum(axis=1) * t_a) / (y * t_a)
    estimated = ((y - 1) * t_a + t_d) * est / (y * t_a)
    return PeriodicSeries(actual, estimated, running_average(actual), running_average(estimated))

"""Experiment configuration: nested dataclasses loaded from and saved to JSON.

Every field has a default, so ``{}`` is a complete configuration.  Unknown
keys and invalid values raise ``ConfigError`` naming the offending field path.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, fields, is_dataclass
from pathlib import Path
from typing import Any

from .channels import DEFAULT_SIGMA, RATE_TABLE_KBPS
from .simulation import POLICIES, SOLVERS

OUT_ENV = "CHANACCESS_OUT"
DEFAULT_OUT = "results"


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


@dataclass
class NetworkConfig:
    num_nodes: int = 15
    num_channels: int = 3
    target_avg_degree: float = 6.0
    require_connected: bool = True


@dataclass
class ProtocolSection:
    r: int = 2
    d: int | None = 3
    epsilon: float = 0.5
    local_growth: bool = False


@dataclass
class ChannelsConfig:
    rate_table: list[float] = field(default_factory=lambda: list(RATE_TABLE_KBPS))
    sigma: float = DEFAULT_SIGMA
    max_rate: float | None = None


@dataclass
class TimingConfig:
    t_b: int = 100
    t_l: int = 50
    t_d: int = 1000
    decision_slots: int = 4
    y: int = 1


@dataclass
class RunConfig:
    horizon: int = 20000
    seeds: list[int] = field(default_factory=lambda: list(range(20)))
    policy: str = "both"
    solver: str = "distributed"


@dataclass
class OutputConfig:
    directory: str | None = None
    formats: list[str] = field(default_factory=lambda: ["csv"])
    row_stride: int = 10        # regret rows: every k-th round plus the last


@dataclass
class ConvergenceConfig:
    cases: list[list[int]] = field(default_factory=lambda: [[n, m] for n in (50, 100, 200) for m in (5, 10)])
    check_mini_round: int = 5
    threshold: float = 0.99


@dataclass
class PeriodicConfig:
    num_nodes: int = 100
    num_channels: int = 10
    updates: int = 1000
    y_values: list[int] = field(default_factory=lambda: [1, 5, 10, 20])
    # LLR's flat indices make exact local searches on 100x10 balls very slow
    policies: list[str] = field(default_factory=lambda: ["proposed"])


@dataclass
class MwisBenchConfig:
    instances: int = 200
    max_nodes: int = 12
    max_channels: int = 3
    epsilons: list[float] = field(default_factory=lambda: [0.5, 1.0])
    d_values: list[int | None] = field(default_factory=lambda: [1, 3, 5, None])


@dataclass
class ExperimentConfig:
    network: NetworkConfig = field(default_factory=NetworkConfig)
    protocol: ProtocolSection = field(default_factory=ProtocolSection)
    channels: ChannelsConfig = field(default_factory=ChannelsConfig)
    timing: TimingConfig = field(default_factory=TimingConfig)
    run: RunConfig = field(default_factory=RunConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    convergence: ConvergenceConfig = field(default_factory=ConvergenceConfig)
    periodic: PeriodicConfig = field(default_factory=PeriodicConfig)
    mwis_bench: MwisBenchConfig = field(default_factory=MwisBenchConfig)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def out_dir(self) -> Path:
        return Path(self.output.directory or os.environ.get(OUT_ENV) or DEFAULT_OUT)


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def _is_num(x) -> bool:
    return (isinstance(x, (int, float))) and not isinstance(x, bool)


def _build(cls, data: Any, path: str):
    if not isinstance(data, dict):
        raise ConfigError(path or "<root>", "expected an object")
    known = {f.name: f for f in fields(cls)}
    for key in data:
        if key not in known:
            raise ConfigError(f"{path}.{key}" if path else key, "unknown field")
    kwargs = {}
    for name, f in known.items():
        if name not in data:
            continue
        sub = f"{path}.{name}" if path else name
        default = f.default_factory() if callable(f.default_factory) else f.default
        if is_dataclass(default):
            kwargs[name] = _build(type(default), data[name], sub)
        else:
            kwargs[name] = _coerce(data[name], default, f.type, sub)
    return cls(**kwargs)


def _coerce(value, default, type_str, path):
    optional = "None" in str(type_str)
    if value is None:
        if optional:
            return None
        raise ConfigError(path, "must not be null")
    if isinstance(default, bool) or type_str == "bool":
        if not isinstance(value, bool):
            raise ConfigError(path, "expected a boolean")
        return value
    if type_str.startswith("int"):
        if not _is_int(value):
            raise ConfigError(path, "expected an integer")
        return value
    if type_str.startswith("float"):
        if not _is_num(value):
            raise ConfigError(path, "expected a number")
        return float(value)
    if type_str == "str" or type_str.startswith("str"):
        if not isinstance(value, str):
            raise ConfigError(path, "expected a string")
        return value
    if type_str.startswith("list"):
        if not isinstance(value, list):
            raise ConfigError(path, "expected a list")
        return list(value)
    return value


def validate(cfg: ExperimentConfig) -> ExperimentConfig:
    """Check ranges and cross-field constraints; raises ``ConfigError``."""

    def need(ok: bool, path: str, msg: str):
        if not ok:
            raise ConfigError(path, msg)

    n = cfg.network
    need(n.num_nodes >= 1, "network.num_nodes", "must be at least 1")
    need(n.num_channels >= 1, "network.num_channels", "must be at least 1")
    need(n.target_avg_degree > 0, "network.target_avg_degree", "must be positive")

    p = cfg.protocol
    need(p.r >= 1, "protocol.r", "must be at least 1")
    need(p.d is None or p.d >= 1, "protocol.d", "must be at least 1 or null")
    need(p.epsilon > 0, "protocol.epsilon", "must be positive")

    c = cfg.channels
    need(len(c.rate_table) > 0 and all(_is_num(x) and x >= 0 for x in c.rate_table),
         "channels.rate_table", "must be a non-empty list of non-negative rates")
    need(c.sigma >= 0, "channels.sigma", "must be non-negative")
    if c.max_rate is not None:
        need(c.max_rate >= max(c.rate_table) and c.max_rate > 0, "channels.max_rate",
             "must be positive and at least the largest rate")
    else:
        need(max(c.rate_table) > 0, "channels.rate_table", "needs a positive rate")

    t = cfg.timing
    need(t.t_b >= 0, "timing.t_b", "must be non-negative")
    need(t.t_l >= 0, "timing.t_l", "must be non-negative")
    need(t.t_d > 0, "timing.t_d", "must be positive")
    need(t.decision_slots >= 0, "timing.decision_slots", "must be non-negative")
    need(t.y >= 1, "timing.y", "must be at least 1")

    r = cfg.run
    need(r.horizon >= 1, "run.horizon", "must be at least 1")
    need(len(r.seeds) >= 1, "run.seeds", "needs at least one seed")
    need(all(_is_int(s) and s >= 0 for s in r.seeds), "run.seeds", "seeds must be non-negative integers")
    need(len(set(r.seeds)) == len(r.seeds), "run.seeds", "seeds must be distinct")
    need(r.policy in (*POLICIES, "both"), "run.policy", f"must be one of {', '.join((*POLICIES, 'both'))}")
    need(r.solver in SOLVERS, "run.solver", f"must be one of {', '.join(SOLVERS)}")

    o = cfg.output
    need(all(f in ("csv", "json") for f in o.formats), "output.formats", "supported formats: csv, json")
    need(o.row_stride >= 1, "output.row_stride", "must be at least 1")

    cv = cfg.convergence
    need(len(cv.cases) > 0, "convergence.cases", "needs at least one case")
    for i, case in enumerate(cv.cases):
        need(isinstance(case, list) and len(case) == 2 and all(_is_int(x) and x >= 1 for x in case),
             f"convergence.cases[{i}]", "expected [num_nodes, num_channels]")
    need(cv.check_mini_round >= 1, "convergence.check_mini_round", "must be at least 1")
    need(0 < cv.threshold <= 1, "convergence.threshold", "must lie in (0, 1]")

    pe = cfg.periodic
    need(pe.num_nodes >= 1, "periodic.num_nodes", "must be at least 1")
    need(pe.num_channels >= 1, "periodic.num_channels", "must be at least 1")
    need(pe.updates >= 1, "periodic.updates", "must be at least 1")
    need(len(pe.y_values) > 0 and all(_is_int(y) and y >= 1 for y in pe.y_values),
         "periodic.y_values", "must be a non-empty list of positive integers")
    need(len(pe.policies) > 0 and all(p in POLICIES for p in pe.policies),
         "periodic.policies", f"must be a non-empty list drawn from {', '.join(POLICIES)}")

    mb = cfg.mwis_bench
    need(mb.instances >= 1, "mwis_bench.instances", "must be at least 1")
    need(mb.max_nodes >= 1, "mwis_bench.max_nodes", "must be at least 1")
    need(mb.max_channels >= 1, "mwis_bench.max_channels", "must be at least 1")
    need(mb.max_nodes * mb.max_channels <= 50, "mwis_bench.max_nodes",
         "instances must fit the exact-search guard (max_nodes * max_channels <= 50)")
    need(len(mb.epsilons) > 0 and all(_is_num(e) and e > 0 for e in mb.epsilons),
         "mwis_bench.epsilons", "must be a non-empty list of positive numbers")
    need(all(d is None or (_is_int(d) and d >= 1) for d in mb.d_values),
         "mwis_bench.d_values", "entries must be positive integers or null")
    return cfg


def from_dict(data: dict) -> ExperimentConfig:
    return validate(_build(ExperimentConfig, data, ""))


def loads(text: str) -> ExperimentConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<root>", f"invalid JSON: {exc.msg} at line {exc.lineno}") from None
    return from_dict(data)


def load(path) -> ExperimentConfig:
    return loads(Path(path).read_text())

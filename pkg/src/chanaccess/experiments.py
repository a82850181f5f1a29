"""Seeded experiment suites and their tidy CSV output.

Each suite returns a ``SuiteResult`` with named tables (lists of row dicts),
a metadata dict and the number of independence violations seen.  Replica
seeds are offset by ``seed_offset``; a replica derives separate streams for
the network, the channel assignment and the channel samples.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .channels import ChannelModel
from .config import ExperimentConfig
from .graph_model import ExtendedGraph, build_extended_graph, channel_assignment, generate_random_network, independence_check
from .metrics import RegretSeries, TimingModel, oracle_optimum, periodic_throughput
from .mwis import exact_mwis, robust_ptas
from .protocol import ProtocolConfig, decide_strategy, weight_broadcast
from .simulation import POLICIES, run_learning

_NET, _CHANNELS, _STREAMS, _WEIGHTS = 0, 1, 2, 3


@dataclass
class SuiteResult:
    name: str
    tables: dict[str, list[dict]] = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)
    violations: int = 0


@dataclass
class Instance:
    seed: int
    h: ExtendedGraph
    model: ChannelModel

    @property
    def means(self) -> np.ndarray:
        return self.model.arm_means()


def make_instance(cfg: ExperimentConfig, seed: int, num_nodes: int, num_channels: int,
                  require_connected: bool | None = None) -> Instance:
    net = cfg.network
    connected = net.require_connected if require_connected is None else require_connected
    g = generate_random_network(num_nodes, num_channels, net.target_avg_degree,
                                [seed, _NET], require_connected=connected)
    ch = cfg.channels
    model = ChannelModel.random(num_nodes, num_channels, [seed, _CHANNELS], tuple(ch.rate_table),
                                ch.sigma, ch.max_rate)
    return Instance(seed, build_extended_graph(g), model)


def protocol_config(cfg: ExperimentConfig, d="config", epsilon: float | None = None) -> ProtocolConfig:
    p = cfg.protocol
    return ProtocolConfig(p.r, p.d if d == "config" else d,
                          p.epsilon if epsilon is None else epsilon, p.local_growth)


def timing_model(cfg: ExperimentConfig) -> TimingModel:
    t = cfg.timing
    return TimingModel(t.t_b, t.t_l, t.t_d, t.decision_slots, t.y)


def _policies(cfg: ExperimentConfig) -> tuple[str, ...]:
    return POLICIES if cfg.run.policy == "both" else (cfg.run.policy,)


def _safe(h: ExtendedGraph, strategy) -> bool:
    if not independence_check(h, strategy):
        return False
    try:
        channel_assignment(h, strategy)
    except ValueError:
        return False
    return True


def run_convergence_suite(cfg: ExperimentConfig, seed_offset: int = 0) -> SuiteResult:
    """Summed Winner weight after every mini-round with an unlimited budget.

    Vertex weights are i.i.d. uniform on [0, 1), so leader election never
    falls back to the id tie-break.  Messages are those of a steady-state
    round: WB by the previous round's Winners, then the decision.
    """
    res = SuiteResult("convergence")
    curve_rows, case_rows = [], []
    cv = cfg.convergence
    seed = cfg.run.seeds[0] + seed_offset
    r = cfg.protocol.r
    for n, m in cv.cases:
        inst = make_instance(cfg, seed, n, m)
        h = inst.h
        w = np.random.default_rng([seed, _WEIGHTS]).random(h.num_vertices)
        dec = decide_strategy(h, w, protocol_config(cfg, d=None))
        if not _safe(h, dec.strategy):
            res.violations += 1
        _, wb = weight_broadcast(h, dec.strategy, w, r)
        msgs = wb.messages + dec.costs.messages
        curve = dec.weight_curve
        final = curve[-1] if curve else 0.0
        for tau in range(1, n + 1):
            val = curve[min(tau, len(curve)) - 1] if curve else 0.0
            curve_rows.append({
                "num_nodes": n, "num_channels": m, "seed": seed, "mini_round": tau,
                "summed_weight": val,
                "leaders": dec.leaders_per_mini_round[tau - 1] if tau <= len(curve) else 0,
            })
        at_check = curve[min(cv.check_mini_round, len(curve)) - 1] if curve else 0.0
        used = dec.costs.mini_rounds_used
        case_rows.append({
            "num_nodes": n, "num_channels": m, "seed": seed, "vertices": h.num_vertices,
            "mini_rounds_used": used, "final_weight": final,
            "weight_at_check": at_check,
            "check_ratio": at_check / final if final > 0 else 1.0,
            "converged": bool(at_check >= cv.threshold * final),
            "strategy_size": len(dec.strategy),
            "max_messages": int(msgs.max()),
            "wb_max_messages": int(wb.messages.max()),
            "message_constant": float(msgs.max()) / (r * r + used),
            "timeslots": dec.costs.total_timeslots + wb.total_timeslots,
        })
    res.tables = {"convergence": curve_rows, "convergence_cases": case_rows}
    res.metadata = {"seed": seed, "r": r, "check_mini_round": cv.check_mini_round,
                    "threshold": cv.threshold}
    return res


def regret_replica(cfg: ExperimentConfig, seed: int) -> dict:
    """One seed of the regret suite: both policies on paired channel streams."""
    inst = make_instance(cfg, seed, cfg.network.num_nodes, cfg.network.num_channels)
    r1 = oracle_optimum(inst.h, inst.means)
    pcfg = protocol_config(cfg)
    theta = float(timing_model(cfg).theta)
    beta = pcfg.rho
    out = {"seed": seed, "r1": r1, "beta": beta, "theta": theta,
           "max_rate": inst.model.max_rate, "runs": {}}
    for policy in _policies(cfg):
        trace = run_learning(inst.h, inst.model, cfg.run.horizon, policy, cfg.run.solver,
                             pcfg, [seed, _STREAMS])
        lam = np.asarray(trace.expected)
        obs = np.asarray(trace.observed)
        series = RegretSeries.from_throughputs(r1, lam, beta, theta)
        out["runs"][policy] = {"trace": trace, "series": series, "observed": obs, "expected": lam}
    return out


def run_regret_suite(cfg: ExperimentConfig, seed_offset: int = 0) -> SuiteResult:
    """Regret, beta-regret and practical variants per round, policy and seed.

    Regret columns use the expected throughput of the chosen strategy; the
    observed and effective (``theta`` times observed) throughputs are
    reported alongside.
    """
    res = SuiteResult("regret")
    rows, summary = [], []
    stride = cfg.output.row_stride
    seeds = sorted(s + seed_offset for s in cfg.run.seeds)
    r1s = {}
    for seed in seeds:
        rep = regret_replica(cfg, seed)
        r1s[seed] = rep["r1"]
        theta = rep["theta"]
        for policy, run in rep["runs"].items():
            trace, series = run["trace"], run["series"]
            res.violations += trace.violations
            obs = run["observed"]
            eff = np.cumsum(theta * obs)
            horizon = len(obs)
            avg = series.average_regret()
            for t in range(horizon):
                if (t + 1) % stride and t + 1 != horizon:
                    continue
                rows.append({
                    "seed": seed, "round": t + 1, "policy": policy,
                    "chosen_strategy_size": trace.strategy_size[t],
                    "observed_throughput": obs[t],
                    "expected_throughput": run["expected"][t],
                    "effective_throughput": theta * obs[t],
                    "cum_effective_throughput": eff[t],
                    "cum_regret": series.regret[t],
                    "cum_beta_regret": series.beta_regret[t],
                    "cum_practical_regret": series.practical_regret[t],
                    "cum_practical_beta_regret": series.practical_beta_regret[t],
                    "messages": trace.messages[t],
                    "mini_rounds_used": trace.mini_rounds[t],
                })
            early = min(1000, horizon) - 1
            summary.append({
                "seed": seed, "policy": policy, "r1": rep["r1"],
                "r1_kbps": rep["r1"] * rep["max_rate"], "horizon": horizon,
                "cum_regret": series.regret[-1],
                "cum_beta_regret": series.beta_regret[-1],
                "cum_practical_regret": series.practical_regret[-1],
                "cum_practical_beta_regret": series.practical_beta_regret[-1],
                "cum_effective_throughput": eff[-1],
                "avg_regret_1000": avg[early],
                "avg_regret_horizon": avg[-1],
                "violations": trace.violations,
                "max_messages": max(trace.messages) if trace.messages else 0,
            })
    res.tables = {"regret": rows, "regret_summary": summary}
    pcfg = protocol_config(cfg)
    res.metadata = {"seeds": seeds, "beta": pcfg.rho, "theta": float(timing_model(cfg).theta),
                    "practical_beta": pcfg.rho, "solver": cfg.run.solver,
                    "r1": {str(k): v for k, v in r1s.items()}, "row_stride": stride}
    return res


def run_periodic_suite(cfg: ExperimentConfig, seed_offset: int = 0) -> SuiteResult:
    """Average actual vs estimated throughput when deciding once every ``y`` slots."""
    res = SuiteResult("periodic")
    rows = []
    pe = cfg.periodic
    timing = timing_model(cfg)
    seed = cfg.run.seeds[0] + seed_offset
    inst = make_instance(cfg, seed, pe.num_nodes, pe.num_channels)
    pcfg = protocol_config(cfg)
    for y in pe.y_values:
        frac = float(timing.period_fraction(y))
        for policy in pe.policies:
            trace = run_learning(inst.h, inst.model, pe.updates * y, policy, cfg.run.solver,
                                 pcfg, [seed, _STREAMS], update_every=y)
            res.violations += trace.violations
            ps = periodic_throughput(trace.observed, trace.estimated[::y], timing, y)
            for z in range(len(ps.actual)):
                rows.append({
                    "y": y, "seed": seed, "policy": policy, "period": z + 1,
                    "actual": ps.actual[z], "estimated": ps.estimated[z],
                    "actual_avg": ps.actual_avg[z], "estimated_avg": ps.estimated_avg[z],
                    "avg_gap": abs(ps.estimated_avg[z] - ps.actual_avg[z]),
                    "transmit_fraction": frac,
                })
    res.tables = {"periodic": rows}
    res.metadata = {"seed": seed, "y_values": list(pe.y_values),
                    "fractions": {str(y): str(timing.period_fraction(y)) for y in pe.y_values},
                    "num_nodes": pe.num_nodes, "num_channels": pe.num_channels}
    return res


def run_mwis_bench(cfg: ExperimentConfig, seed_offset: int = 0) -> SuiteResult:
    """Exact vs centralized PTAS vs distributed decisions on small random instances."""
    res = SuiteResult("mwis_bench")
    rows = []
    mb = cfg.mwis_bench
    base = cfg.run.seeds[0] + seed_offset
    failures = 0
    for i in range(mb.instances):
        rng = np.random.default_rng([base, i, 7])
        n = int(rng.integers(2, mb.max_nodes + 1))
        m = int(rng.integers(1, mb.max_channels + 1))
        inst = make_instance(cfg, int(rng.integers(2**31)), n, m, require_connected=False)
        h = inst.h
        # alternate continuous and coarse (tie-prone) weights
        w = rng.random(h.num_vertices) if i % 2 == 0 else rng.integers(0, 4, h.num_vertices) / 3.0
        opt = exact_mwis(h, w).total_weight
        for eps in mb.epsilons:
            rho = 1.0 + eps
            entries = [("ptas", None, robust_ptas(h, w, eps).members)]
            for d in mb.d_values:
                entries.append(("distributed", d, decide_strategy(h, w, protocol_config(cfg, d=d, epsilon=eps)).strategy))
            for solver, d, members in entries:
                if not _safe(h, members):
                    res.violations += 1
                weight = float(sum(w[k] for k in members))
                ok = weight * rho >= opt - 1e-9
                if not ok and (solver == "ptas" or d is None):
                    failures += 1
                rows.append({
                    "instance": i, "num_nodes": n, "num_channels": m, "epsilon": eps,
                    "solver": solver, "d": "N" if (solver == "distributed" and d is None) else ("" if d is None else d),
                    "weight": weight, "exact_weight": opt,
                    "ratio": opt / weight if weight > 0 else (1.0 if opt == 0 else float("inf")),
                    "within_bound": bool(ok),
                })
    res.tables = {"mwis_bench": rows}
    res.metadata = {"instances": mb.instances, "epsilons": list(mb.epsilons),
                    "bound_failures": failures}
    return res


SUITES = {
    "convergence": run_convergence_suite,
    "regret": run_regret_suite,
    "periodic": run_periodic_suite,
    "mwis-bench": run_mwis_bench,
}


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return str(v)


def table_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if not rows:
        return ""
    writer = csv.writer(buf, lineterminator="\n")
    cols = list(rows[0])
    writer.writerow(cols)
    for row in rows:
        writer.writerow([_cell(row[c]) for c in cols])
    return buf.getvalue()


def write_result(res: SuiteResult, cfg: ExperimentConfig, out_dir: Path) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, rows in res.tables.items():
        if "csv" in cfg.output.formats:
            p = out_dir / f"{name}.csv"
            p.write_text(table_csv(rows))
            written.append(p)
        if "json" in cfg.output.formats:
            p = out_dir / f"{name}.json"
            p.write_text(json.dumps([{k: _cell(v) for k, v in r.items()} for r in rows], indent=1) + "\n")
            written.append(p)
    meta = {"suite": res.name, "violations": res.violations, "config": cfg.to_dict(), **res.metadata}
    p = out_dir / f"{res.name}_meta.json"
    p.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    written.append(p)
    return written

import csv
import json

import pytest
from hypothesis import given, settings, strategies as st

from chanaccess.cli import main
from chanaccess.config import OUT_ENV, ConfigError, ExperimentConfig, from_dict, loads
from chanaccess.experiments import run_mwis_bench, run_periodic_suite, table_csv

SMALL = {
    "network": {"num_nodes": 8, "num_channels": 2},
    "run": {"horizon": 60, "seeds": [0, 1]},
    "convergence": {"cases": [[20, 2], [30, 3]]},
    "periodic": {"num_nodes": 20, "num_channels": 3, "updates": 20, "y_values": [1, 5]},
    "mwis_bench": {"instances": 6, "max_nodes": 6, "max_channels": 2, "d_values": [1, None]},
}


def test_empty_config_is_default():
    assert loads("{}") == ExperimentConfig()
    assert ExperimentConfig().run.horizon == 20000 and len(ExperimentConfig().run.seeds) == 20


@pytest.mark.parametrize("data, path", [
    ({"run": {"horizon": 0}}, "run.horizon"),
    ({"run": {"seeds": []}}, "run.seeds"),
    ({"run": {"policy": "greedy"}}, "run.policy"),
    ({"network": {"num_nodes": "ten"}}, "network.num_nodes"),
    ({"network": {"bogus": 1}}, "network.bogus"),
    ({"protocol": {"d": 0}}, "protocol.d"),
    ({"channels": {"max_rate": 10.0}}, "channels.max_rate"),
    ({"convergence": {"cases": [[10]]}}, "convergence.cases[0]"),
    ({"mwis_bench": {"max_nodes": 30, "max_channels": 3}}, "mwis_bench.max_nodes"),
    ({"output": {"row_stride": 0}}, "output.row_stride"),
    ({"periodic": {"policies": ["greedy"]}}, "periodic.policies"),
    ([1, 2], "<root>"),
])
def test_validation_reports_field_path(data, path):
    with pytest.raises(ConfigError) as err:
        from_dict(data) if isinstance(data, dict) else loads(json.dumps(data))
    assert err.value.path == path


def test_invalid_json():
    with pytest.raises(ConfigError) as err:
        loads("{not json")
    assert err.value.path == "<root>"


configs = st.fixed_dictionaries({}, optional={
    "network": st.fixed_dictionaries({}, optional={
        "num_nodes": st.integers(1, 40), "num_channels": st.integers(1, 5),
        "target_avg_degree": st.floats(0.5, 20.0), "require_connected": st.booleans()}),
    "protocol": st.fixed_dictionaries({}, optional={
        "r": st.integers(1, 3), "d": st.one_of(st.none(), st.integers(1, 9)),
        "epsilon": st.floats(0.01, 4.0), "local_growth": st.booleans()}),
    "run": st.fixed_dictionaries({}, optional={
        "horizon": st.integers(1, 10**6), "seeds": st.lists(st.integers(0, 10**6), min_size=1, max_size=5, unique=True),
        "policy": st.sampled_from(["proposed", "llr", "both"]),
        "solver": st.sampled_from(["distributed", "centralized_ptas", "exact"])}),
    "timing": st.fixed_dictionaries({}, optional={"y": st.integers(1, 40), "t_d": st.integers(1, 5000)}),
    "output": st.fixed_dictionaries({}, optional={
        "formats": st.lists(st.sampled_from(["csv", "json"]), min_size=1, max_size=2, unique=True),
        "row_stride": st.integers(1, 100)}),
})


@settings(max_examples=100, deadline=None)
@given(configs)
def test_config_round_trip(data):
    cfg = from_dict(data)
    again = loads(cfg.to_json())
    assert again == cfg
    assert again.to_json() == cfg.to_json()


def write_config(tmp_path, data):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(data))
    return p


def test_cli_validation_error(tmp_path, capsys):
    p = write_config(tmp_path, {"run": {"horizon": -5}})
    assert main(["regret", "--config", str(p), "--out", str(tmp_path / "o")]) == 2
    line = json.loads(capsys.readouterr().err.strip())
    assert line["error"] == "config" and line["field"] == "run.horizon"


def test_cli_missing_file(tmp_path, capsys):
    assert main(["regret", "--config", str(tmp_path / "nope.json")]) == 2
    assert json.loads(capsys.readouterr().err)["error"] == "config"


def test_cli_unknown_suite(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["fly"])
    assert exc.value.code != 0


def test_cli_oracle_guard(tmp_path, capsys):
    p = write_config(tmp_path, {"network": {"num_nodes": 30, "num_channels": 2}, "run": {"horizon": 2, "seeds": [0]}})
    assert main(["regret", "--config", str(p), "--out", str(tmp_path / "o")]) == 2
    assert json.loads(capsys.readouterr().err)["error"] == "oracle"


def test_cli_env_output_dir(tmp_path, monkeypatch, capsys):
    p = write_config(tmp_path, SMALL)
    monkeypatch.setenv(OUT_ENV, str(tmp_path / "env_out"))
    assert main(["mwis-bench", "--config", str(p)]) == 0
    assert (tmp_path / "env_out" / "mwis_bench.csv").exists()
    assert main(["mwis-bench", "--config", str(p), "--out", str(tmp_path / "flag")]) == 0
    assert (tmp_path / "flag" / "mwis_bench.csv").exists()


@pytest.mark.parametrize("suite", ["convergence", "regret", "periodic", "mwis-bench"])
def test_cli_suites_are_byte_identical(tmp_path, suite, capsys):
    p = write_config(tmp_path, {**SMALL, "output": {"formats": ["csv", "json"]}})
    outs = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        assert main([suite, "--config", str(p), "--out", str(out), "--seed-offset", "3"]) == 0
        outs.append({f.name: f.read_bytes() for f in sorted(out.iterdir())})
    assert outs[0] == outs[1]
    assert any(name.endswith(".csv") for name in outs[0])


def test_regret_csv_schema(tmp_path, capsys):
    p = write_config(tmp_path, {**SMALL, "output": {"row_stride": 7}})
    assert main(["regret", "--config", str(p), "--out", str(tmp_path)]) == 0
    with open(tmp_path / "regret.csv") as f:
        rows = list(csv.DictReader(f))
    for col in ("seed", "round", "policy", "chosen_strategy_size", "observed_throughput",
                "effective_throughput", "cum_regret", "cum_beta_regret", "cum_practical_regret",
                "messages", "mini_rounds_used"):
        assert col in rows[0]
    assert [r["seed"] for r in rows] == sorted(r["seed"] for r in rows)
    rounds = sorted({int(r["round"]) for r in rows})
    assert rounds == [7 * k for k in range(1, 9)] + [60]
    meta = json.loads((tmp_path / "regret_meta.json").read_text())
    assert meta["beta"] == 1.5 and meta["theta"] == 0.5 and meta["violations"] == 0


def test_periodic_row_count():
    cfg = from_dict({"run": {"seeds": [0]},
                     "periodic": {"num_nodes": 20, "num_channels": 3, "updates": 1000, "y_values": [1]}})
    res = run_periodic_suite(cfg)
    assert len(res.tables["periodic"]) == 1000


def test_mwis_bench_rows():
    res = run_mwis_bench(from_dict(SMALL))
    rows = res.tables["mwis_bench"]
    assert len(rows) == 6 * 2 * 3
    assert res.violations == 0 and res.metadata["bound_failures"] == 0
    assert table_csv(rows).splitlines()[0].startswith("instance,")

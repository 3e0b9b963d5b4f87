import csv
import json
import math

import pytest

from gchlab.cli import main
from gchlab.config import ConfigError, load_config, parse_config
from gchlab.runner import EXIT_BLOWUP, EXIT_ERROR, EXIT_OK, simulate
from gchlab.sweep import parse_axis, sweep, worker_count


def base_config(**over):
    cfg = {
        "params": {"N": 1, "beta": 2, "k": 0, "lambda": 1},
        "grid": {"L": 20, "nx": 256},
        "time": {"t_end": 1, "sample_interval": 0.1},
        "initial": {"kind": "constant", "value": 1},
        "monitors": [],
        "output": {"snapshots": False},
    }
    cfg.update(over)
    return cfg


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_json(path, data):
    path.write_text(json.dumps(data))
    return path


def test_defaults_filled():
    cfg = parse_config(base_config())
    assert cfg.time.cfl == 0.3 and cfg.time.dt_max == 0.01
    assert cfg.time.dt_min == 1e-10 and cfg.time.blowup_slope_factor == 1e4
    assert cfg.dump()["params"]["lambda"] == 1


def test_missing_and_unknown_keys():
    data = base_config()
    del data["params"]["beta"]
    with pytest.raises(ConfigError, match="params.beta required"):
        parse_config(data)
    with pytest.raises(ConfigError, match="x: unknown key"):
        parse_config(base_config(x=1))
    with pytest.raises(ConfigError, match="unknown monitor"):
        parse_config(base_config(monitors=["nope"]))


@pytest.mark.parametrize(
    "section, value",
    [("grid", {"L": 20, "nx": 100}), ("params", {"N": 0, "beta": 1, "k": 0, "lambda": 0})],
)
def test_invalid_values_rejected(section, value):
    with pytest.raises(ConfigError):
        parse_config(base_config(**{section: value}))


def test_parse_error_reports_location(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "params": {"N": 1,,}\n}')
    with pytest.raises(ConfigError, match=r"bad.json:2:"):
        load_config(path)


def test_inapplicable_monitor_is_reported(tmp_path):
    cfg = parse_config(base_config(params={"N": 1, "beta": 3, "k": 0, "lambda": 1}, monitors=["h1_decay"]))
    result = simulate(cfg, tmp_path)
    assert result.exit_code == EXIT_OK
    assert result.summary["monitors"]["h1_decay_residual"] == "inapplicable"
    rows = read_csv(tmp_path / "timeseries.csv")
    assert all(r["h1_decay_residual"] == "" for r in rows)


def test_simulate_uniform_decay(tmp_path):
    cfg_path = write_json(tmp_path / "c.json", base_config(monitors=["energy_balance", "h1_decay"]))
    assert main(["simulate", "--config", str(cfg_path), "--out", str(tmp_path / "run")]) == EXIT_OK
    summary = json.loads((tmp_path / "run" / "summary.json").read_text())
    assert summary["status"] == "ReachedFinalTime"
    assert summary["final_norms"]["linf_u"] == pytest.approx(math.exp(-1), abs=1e-8)
    rows = read_csv(tmp_path / "run" / "timeseries.csv")
    assert list(rows[0])[:8] == ["t", "step", "dt", "linf_u", "linf_ux", "l2_u", "h1_u", "l2_y"]
    assert [float(r["t"]) for r in rows] == pytest.approx([0.1 * i for i in range(11)], abs=1e-12)


def test_simulate_blowup_exit_code(tmp_path):
    data = base_config(
        params={"N": 1, "beta": 2, "k": 0, "lambda": 0},
        grid={"L": 15, "nx": 512},
        time={"t_end": 2, "sample_interval": 0.5, "blowup_slope_factor": 2},
        initial={"kind": "odd_gaussian", "amplitude": -5},
    )
    cfg_path = write_json(tmp_path / "c.json", data)
    assert main(["simulate", "--config", str(cfg_path), "--out", str(tmp_path / "run")]) == EXIT_BLOWUP
    summary = json.loads((tmp_path / "run" / "summary.json").read_text())
    assert summary["status"] == "BlowupDetected"
    assert summary["blowup"]["reason"] == "slope"


def test_simulate_missing_config_is_error(tmp_path):
    assert main(["simulate", "--config", str(tmp_path / "none.json")]) == EXIT_ERROR


def test_tail_columns_and_snapshots(tmp_path):
    data = base_config(
        params={"N": 1, "beta": 1, "k": 0.1, "lambda": 0.3},
        grid={"L": 10, "nx": 512},
        time={"t_end": 0.2, "sample_interval": 0.1},
        initial={"kind": "bump", "amplitude": 0.5, "a": -2, "b": 2},
        monitors=["tails", "f_positivity"],
        output={"snapshots": True},
    )
    result = simulate(parse_config(data), tmp_path)
    assert result.exit_code == EXIT_OK
    header = list(read_csv(tmp_path / "timeseries.csv")[0])
    for col in ("E_plus", "E_minus", "support_a", "support_b", "F_value"):
        assert col in header
    snaps = sorted((tmp_path / "snapshots").iterdir())
    assert len(snaps) == 3
    assert list(read_csv(snaps[0])[0]) == ["x", "u", "u_x", "y"]


def test_parse_axis():
    assert parse_axis("params.lambda=0.1,1,10") == ("params.lambda", [0.1, 1, 10])
    with pytest.raises(ValueError):
        parse_axis("params.lambda")


def test_sweep_threshold_scaling(tmp_path):
    template = base_config(
        params={"N": 2, "beta": 3, "k": 0, "lambda": 1},
        time={"t_end": 0.05, "sample_interval": 0.05},
        initial={"kind": "from_momentum", "momentum": {"kind": "bump", "a": -4, "b": 4}, "l2_norm_over_threshold": 0.5},
    )
    rows = sweep(template, [parse_axis("params.lambda=1,4")], tmp_path, workers=2)
    assert [r["outcome"] for r in rows] == ["ReachedFinalTime"] * 2
    assert rows[1]["threshold_3_1"] / rows[0]["threshold_3_1"] == pytest.approx(2.0)
    assert all(r["below_threshold"] for r in rows)
    table = read_csv(tmp_path / "classification.csv")
    assert table[0]["below_threshold"] == "true"
    assert list(table[0])[:2] == ["params.lambda", "cell"]


def test_sweep_records_bad_cell(tmp_path):
    rows = sweep(base_config(), [parse_axis("grid.nx=64,100")], tmp_path, workers=1)
    assert rows[0]["outcome"] == "ReachedFinalTime"
    assert rows[1]["outcome"] == "Error" and rows[1]["error"]


def test_worker_count_from_env(monkeypatch):
    monkeypatch.setenv("GCHLAB_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("GCHLAB_THREADS", "0")
    with pytest.raises(ValueError):
        worker_count()


def test_exact_command(tmp_path):
    out = tmp_path / "exact"
    code = main(["exact", "--kind", "uniform_decay", "--params", '{"c": 2, "lambda": 0.5}',
                 "--grid", "10,64", "--times", "0,2", "--out", str(out)])
    assert code == EXIT_OK
    rows = read_csv(out / "exact_0001.csv")
    assert float(rows[0]["u"]) == pytest.approx(2 * math.exp(-1))
    assert [r["t"] for r in read_csv(out / "times.csv")] == ["0", "2"]
    assert main(["exact", "--kind", "ch_peakon", "--params", '{"bad": 1}',
                 "--grid", "10,64", "--times", "0", "--out", str(out)]) == EXIT_ERROR


def test_verify_rejects_inapplicable_params(capsys):
    assert main(["verify", "thm41", "--params", '{"N": 2, "beta": 2, "k": 0, "lambda": 0.1}']) == EXIT_ERROR

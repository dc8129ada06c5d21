import json

import pytest

from ridgelab.cli import main
from ridgelab.config import DEFAULTS, FULL_TRIALS, ConfigError, ExperimentConfig, load_config

SMALL = {"signal": {"components": [{"amp": {"const": 1.0}, "phase": {"tone_hz": 10.0}}],
                    "t0": 0.0, "t1": 4.0, "fs": 100.0},
         "grid": {"s_min": 4.0, "s_max": 16.0, "voices": 8},
         "snr_targets": [-10.0, 10.0]}


def write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return p


def test_defaults_fill_in():
    cfg = ExperimentConfig.from_dict({}, "snr-sweep", env={})
    assert cfg.trials == 200 and cfg.base_seed == 0 and cfg.lam == 0.1
    assert cfg.grid.s_min == 4.0 and cfg.grid.n_time == 1000
    assert len(cfg.snr_targets) == 11 and cfg.snr_targets[0] == -15.0
    assert cfg.t_index == 500
    assert cfg.section("bounds")["mc_trials"] == 10000
    assert DEFAULTS["trials"] is None


def test_per_command_trials_and_full():
    assert ExperimentConfig.from_dict({}, "validate", env={}).trials == 10000
    assert ExperimentConfig.from_dict({}, "histogram-d2", env={}).trials == 1000
    assert ExperimentConfig.from_dict({}, "snr-sweep", {"full": True}, env={}).trials == FULL_TRIALS
    assert ExperimentConfig.from_dict({}, "snr-sweep", {"full": True, "trials": 7}, env={}).trials == 7


def test_seed_precedence():
    cfg = ExperimentConfig.from_dict({"base_seed": 4}, "snr-sweep", {"base_seed": 5}, env={"RIDGELAB_SEED": "9"})
    assert cfg.base_seed == 9
    assert ExperimentConfig.from_dict({"base_seed": 4}, "snr-sweep", {"base_seed": 5}, env={}).base_seed == 5
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({}, "snr-sweep", env={"RIDGELAB_SEED": "abc"})


def test_nested_sections_merge():
    cfg = ExperimentConfig.from_dict({"bounds": {"snr_db": 5.0}}, "bounds", env={})
    assert cfg.section("bounds")["snr_db"] == 5.0 and cfg.section("bounds")["interval_bins"] == 10


def test_invalid_configs(tmp_path):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"lambda": -1}, env={})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"trials": 0}, env={})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"grid": {"s_min": 8.0, "s_max": 4.0}}, env={})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"bands": [[2.0, 1.0]]}, env={})
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(bad)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")


def test_materialized_round_trip(tmp_path):
    cfg = ExperimentConfig.from_dict(SMALL, "snr-sweep", env={})
    p = tmp_path / "m.json"
    cfg.write(p)
    again = load_config(p, "snr-sweep", env={})
    assert again.signal == cfg.signal and again.grid == cfg.grid and again.trials == cfg.trials


def test_cli_success(tmp_path, capsys, monkeypatch):
    monkeypatch.delenv("RIDGELAB_SEED", raising=False)
    p = write(tmp_path, SMALL)
    out = tmp_path / "o"
    assert main(["snr-sweep", "--config", str(p), "--trials", "4", "--out", str(out)]) == 0
    line = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert line["ok"] and line["command"] == "snr-sweep"
    assert (out / "trials.csv").exists() and (out / "config.json").exists()


def test_cli_config_errors(tmp_path, monkeypatch):
    monkeypatch.delenv("RIDGELAB_SEED", raising=False)
    bad = tmp_path / "bad.json"
    bad.write_text("[1, 2")
    assert main(["snr-sweep", "--config", str(bad)]) == 2
    p = write(tmp_path, SMALL)
    assert main(["snr-sweep", "--config", str(p), "--threads", "0"]) == 2
    assert main(["ridge-compare", "--config", str(p), "--trials", "5", "--out", str(tmp_path / "o")]) == 2
    assert main(["validate", "--config", str(p), "--trials", "50", "--out", str(tmp_path / "o")]) == 2
    with pytest.raises(SystemExit):
        main(["nonsense", "--config", str(p)])


def test_cli_validation_failure(tmp_path, monkeypatch):
    monkeypatch.delenv("RIDGELAB_SEED", raising=False)
    cfg = dict(SMALL)
    cfg["ridge_compare"] = {"snr_db": 60.0}
    p = write(tmp_path, cfg)
    # at very high SNR both ridges agree, so no nonzero differences remain
    assert main(["ridge-compare", "--config", str(p), "--trials", "30", "--lambda", "0",
                 "--out", str(tmp_path / "o")]) == 1

import json

import pytest

from prefinfer import cli


def run(*argv):
    return cli.main(list(argv))


def small_config(tmp_path, seed=42):
    """Config with the full pipeline shape but a tiny training budget."""
    out = tmp_path / "artifacts"
    payload = {
        "seed": seed,
        "out_dir": str(out),
        "grid_step": 0.1,
        "data": {
            "source": "synthetic",
            "train_seed": 7,
            "eval_seed": 19,
            "eval_days": 7,
            "price_csv": None,
            "renewable_csv": None,
            "background_csv": None,
            "timestamp_column": "timestamp",
            "value_column": "value",
        },
        "env": {
            "appliance_power": 1.0,
            "task_hours_per_day": 2,
            "comfort_window": list(range(7)),
            "cost_scale": 10.0,
        },
        "agent": {
            "episodes": 40,
            "replay_capacity": 1000,
            "epsilon_start": 1.0,
            "epsilon_end": 0.01,
            "start_training_after": 2,
            "target_copy_period": 10,
            "batch_size": 64,
            "gamma": 1.0,
            "learning_rate": 0.001,
            "hidden": [32, 32, 16],
            "epsilon_schedule": "reciprocal",
        },
        "dwpi": {
            "epochs": 60,
            "batch_size": 8,
            "learning_rate": 0.01,
            "hidden": [16, 16, 8],
        },
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(payload))
    return path, out


class TestConfigInit:
    def test_writes_table_defaults(self, tmp_path):
        out = tmp_path / "artifacts"
        assert run("config", "init", "--out", str(out)) == 0
        payload = json.loads((out / "config.json").read_text())
        agent = payload["agent"]
        assert agent["episodes"] == 20000
        assert agent["replay_capacity"] == 1000
        assert agent["epsilon_start"] == 1.0
        assert agent["epsilon_end"] == 0.01
        assert agent["start_training_after"] == 10
        assert agent["target_copy_period"] == 50
        assert agent["batch_size"] == 64
        assert agent["gamma"] == 1.0
        assert agent["learning_rate"] == 0.001
        assert agent["hidden"] == [32, 32, 16]
        dwpi = payload["dwpi"]
        assert dwpi["epochs"] == 1500
        assert dwpi["batch_size"] == 32
        assert dwpi["learning_rate"] == 0.01
        assert dwpi["hidden"] == [16, 16, 8]

    def test_refuses_overwrite(self, tmp_path):
        out = tmp_path / "artifacts"
        assert run("config", "init", "--out", str(out)) == 0
        assert run("config", "init", "--out", str(out)) == cli.EXIT_RUNTIME
        assert run("config", "init", "--out", str(out), "--force") == 0

    def test_respects_out_env_var(self, tmp_path, monkeypatch):
        out = tmp_path / "from_env"
        monkeypatch.setenv("PREFINFER_OUT", str(out))
        assert run("config", "init") == 0
        assert (out / "config.json").exists()


class TestStageOrdering:
    def test_train_dwpi_before_train_agent(self, tmp_path):
        config, out = small_config(tmp_path)
        assert run("data", "prepare", "--config", str(config)) == 0
        assert run("train-dwpi", "--config", str(config)) == cli.EXIT_MISSING

    def test_train_agent_before_data(self, tmp_path):
        config, out = small_config(tmp_path)
        assert run("train-agent", "--config", str(config)) == cli.EXIT_MISSING

    def test_missing_config_file(self, tmp_path):
        missing = tmp_path / "nope.json"
        assert run("data", "prepare", "--config", str(missing)) == cli.EXIT_MISSING


class TestExitCodes:
    def test_usage_error(self):
        assert run("no-such-command") == cli.EXIT_USAGE

    def test_config_error(self, tmp_path):
        bad = tmp_path / "config.json"
        bad.write_text(json.dumps({"seed": "x"}))
        assert run("data", "prepare", "--config", str(bad)) == cli.EXIT_CONFIG

    def test_invalid_weights_flag(self, tmp_path):
        config, out = small_config(tmp_path)
        assert run("data", "prepare", "--config", str(config)) == 0
        code = run("train-agent", "--config", str(config), "--weights", "0.9,0.9")
        assert code == cli.EXIT_CONFIG

    def test_damaged_artifact_is_a_oneline_runtime_error(self, tmp_path, capsys):
        config, out = small_config(tmp_path)
        assert run("data", "prepare", "--config", str(config)) == 0
        assert run("train-agent", "--config", str(config)) == 0
        (out / "agent.meta.json").unlink()  # sidecar gone, model present
        code = run("gen-demos", "--config", str(config))
        assert code == cli.EXIT_RUNTIME
        assert "error" in capsys.readouterr().err.lower()


class TestDataPrepare:
    def test_csv_source_end_to_end(self, tmp_path):
        # 8 days of hourly samples per signal, column names non-default
        hours = 8 * 24
        for name, formula in (
            ("price.csv", lambda h: 0.02 + 0.01 * (h % 24 > 16)),
            ("renewable.csv", lambda h: 1.0 if 8 <= h % 24 <= 18 else 0.0),
            ("background.csv", lambda h: 0.4),
        ):
            rows = ["ts,kw"] + [f"{h * 3600},{formula(h)}" for h in range(hours)]
            (tmp_path / name).write_text("\n".join(rows) + "\n")
        config_path, out = small_config(tmp_path)
        payload = json.loads(config_path.read_text())
        payload["data"].update(
            source="csv",
            price_csv=str(tmp_path / "price.csv"),
            renewable_csv=str(tmp_path / "renewable.csv"),
            background_csv=str(tmp_path / "background.csv"),
        )
        config_path.write_text(json.dumps(payload))
        code = run("data", "prepare", "--config", str(config_path),
                   "--timestamp-column", "ts", "--value-column", "kw")
        assert code == 0
        train = json.loads((out / "window_train.json").read_text())
        evaluation = json.loads((out / "window_eval.json").read_text())
        assert train["days"] == 1
        assert evaluation["days"] == 7
        assert train["price"][0] == 0.02

    def test_writes_both_windows(self, tmp_path):
        config, out = small_config(tmp_path)
        assert run("data", "prepare", "--config", str(config)) == 0
        train = json.loads((out / "window_train.json").read_text())
        evaluation = json.loads((out / "window_eval.json").read_text())
        assert train["days"] == 1
        assert evaluation["days"] == 7
        assert len(evaluation["price"]) == 168

    def test_refuses_overwrite_without_force(self, tmp_path):
        config, out = small_config(tmp_path)
        assert run("data", "prepare", "--config", str(config)) == 0
        assert run("data", "prepare", "--config", str(config)) == cli.EXIT_RUNTIME
        assert run("data", "prepare", "--config", str(config), "--force") == 0


class TestPipeline:
    def test_run_all_and_infer(self, tmp_path, capsys):
        config, out = small_config(tmp_path)
        assert run("run-all", "--config", str(config)) == 0
        for name in ("window_train.json", "window_eval.json", "agent.json",
                     "agent.meta.json", "demos.csv", "dwpi.json", "dwpi.meta.json",
                     "validation.json", "comparison.json", "validation.md",
                     "comparison.md"):
            assert (out / name).exists(), name

        capsys.readouterr()
        assert run("infer", "--config", str(config), "--schedule", "2,3") == 0
        printed = json.loads(capsys.readouterr().out.strip())
        assert printed["w_cost"] + printed["w_comf"] == pytest.approx(1.0, abs=1e-9)
        assert 0.0 < printed["w_cost"] < 1.0

    def test_run_all_is_deterministic(self, tmp_path):
        config, out = small_config(tmp_path)
        assert run("run-all", "--config", str(config), "--seed", "11") == 0
        first_validation = (out / "validation.json").read_bytes()
        first_comparison = (out / "comparison.json").read_bytes()
        assert run("run-all", "--config", str(config), "--seed", "11", "--force") == 0
        assert (out / "validation.json").read_bytes() == first_validation
        assert (out / "comparison.json").read_bytes() == first_comparison

    def test_seed_changes_artifacts(self, tmp_path):
        config, out = small_config(tmp_path)
        assert run("run-all", "--config", str(config), "--seed", "1") == 0
        first = (out / "demos.csv").read_bytes()
        assert run("run-all", "--config", str(config), "--seed", "2", "--force") == 0
        assert (out / "demos.csv").read_bytes() != first

    def test_fixed_weight_agent_training(self, tmp_path):
        config, out = small_config(tmp_path)
        assert run("data", "prepare", "--config", str(config)) == 0
        code = run("train-agent", "--config", str(config), "--weights", "0.3,0.7")
        assert code == 0
        assert (out / "agent.json").exists()

    def test_report_reemits_markdown(self, tmp_path):
        config, out = small_config(tmp_path)
        assert run("run-all", "--config", str(config)) == 0
        (out / "validation.md").unlink()
        assert run("report", "--config", str(config), "--format", "markdown",
                   "--force") == 0
        body = (out / "validation.md").read_text()
        assert body.count("| always_max_comfort |") == 1
        assert body.count("| mixture |") == 1

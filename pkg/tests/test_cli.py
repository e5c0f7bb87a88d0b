"""End-to-end pipeline through the command line entry point."""

import json
import os

import pytest

from jamsense.cli import main


def _write_sim_config(path, **overrides):
    cfg = {
        "n_users": 5,
        "n_attackers": 2,
        "attacker_power_dbm": 20.0,
        "duration_s": 2.0,
        "allow_off_grid": True,
        "n_runs": 4,
    }
    cfg.update(overrides)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(cfg, fh)
    return path


@pytest.fixture
def pipeline_dirs(tmp_path):
    d = {
        "cfg": str(tmp_path / "scenario.json"),
        "runs": str(tmp_path / "runs"),
        "dataset": str(tmp_path / "dataset"),
        "model": str(tmp_path / "model.ckpt"),
        "report": str(tmp_path / "report.json"),
    }
    _write_sim_config(d["cfg"])
    return d


class TestPipeline:
    def test_simulate_to_eval(self, pipeline_dirs, capsys):
        d = pipeline_dirs
        assert main(["simulate", "--config", d["cfg"], "--out", d["runs"]]) == 0
        # attack runs plus clean runs so both classes exist
        clean_cfg = _write_sim_config(
            d["cfg"] + ".clean", n_attackers=0, seed=100
        )
        assert main(["simulate", "--config", clean_cfg, "--out", d["runs"]]) == 0
        assert len(os.listdir(d["runs"])) == 8

        assert (
            main(
                [
                    "dataset",
                    "--runs",
                    d["runs"],
                    "--w",
                    "50",
                    "--test-fraction",
                    "0.25",
                    "--out",
                    d["dataset"],
                ]
            )
            == 0
        )
        assert os.path.exists(os.path.join(d["dataset"], "manifest.json"))

        assert (
            main(
                [
                    "train",
                    "--dataset",
                    d["dataset"],
                    "--epochs",
                    "1",
                    "--out",
                    d["model"],
                ]
            )
            == 0
        )
        assert os.path.exists(d["model"])

        assert (
            main(
                [
                    "eval",
                    "--model",
                    d["model"],
                    "--dataset",
                    d["dataset"],
                    "--out",
                    d["report"],
                ]
            )
            == 0
        )
        report = json.loads(open(d["report"]).read())
        assert 0.0 <= report["accuracy"] <= 1.0
        assert report["fallback_rate"] == 0.0

        capsys.readouterr()
        assert main(["bench", "--model", d["model"], "--dataset", d["dataset"]]) == 0
        bench = json.loads(capsys.readouterr().out.strip())
        assert bench["w"] == 50 and bench["samples"] >= 100

    def test_eval_with_vote_and_fallback(self, pipeline_dirs):
        d = pipeline_dirs
        main(["simulate", "--config", d["cfg"], "--out", d["runs"]])
        clean_cfg = _write_sim_config(d["cfg"] + ".clean", n_attackers=0, seed=100)
        main(["simulate", "--config", clean_cfg, "--out", d["runs"]])
        main(["dataset", "--runs", d["runs"], "--w", "50", "--out", d["dataset"]])
        main(["train", "--dataset", d["dataset"], "--epochs", "1", "--out", d["model"]])
        assert (
            main(
                [
                    "eval",
                    "--model",
                    d["model"],
                    "--dataset",
                    d["dataset"],
                    "--method",
                    "1",
                    "--fallback",
                    "gnb",
                    "--out",
                    d["report"],
                ]
            )
            == 0
        )
        report = json.loads(open(d["report"]).read())
        assert report["method"] == "1"
        assert 0.0 <= report["fallback_rate"] <= 1.0


class TestGridCommand:
    def test_grid_runs_and_writes_csv(self, tmp_path, capsys):
        grid_path = tmp_path / "grid.json"
        grid_path.write_text(
            json.dumps(
                {
                    "axes": {"w": [50]},
                    "base": {
                        "n_users": 5,
                        "n_attackers": 2,
                        "attacker_power_dbm": 20.0,
                        "duration_s": 2.0,
                        "allow_off_grid": True,
                    },
                    "runs_per_class": 3,
                    "epochs": 1,
                }
            )
        )
        out = tmp_path / "grid.csv"
        assert main(["grid", "--grid", str(grid_path), "--out", str(out)]) == 0
        assert out.exists() and (tmp_path / "grid.csv.manifest.json").exists()
        assert "1 row(s)" in capsys.readouterr().out


class TestExitCodes:
    def test_missing_config_file_is_runtime_failure(self, tmp_path):
        assert (
            main(
                [
                    "simulate",
                    "--config",
                    str(tmp_path / "nope.json"),
                    "--out",
                    str(tmp_path / "runs"),
                ]
            )
            == 3
        )

    def test_bad_scenario_is_config_error(self, tmp_path):
        cfg = tmp_path / "bad.json"
        cfg.write_text(json.dumps({"n_users": 7}))  # off the allowed grid
        assert (
            main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "runs")])
            == 2
        )

    def test_empty_runs_dir_is_config_error(self, tmp_path):
        runs = tmp_path / "runs"
        runs.mkdir()
        assert (
            main(
                ["dataset", "--runs", str(runs), "--out", str(tmp_path / "ds")]
            )
            == 2
        )

    def test_determinism_byte_identical(self, tmp_path):
        outs = []
        for tag in ("a", "b"):
            base = tmp_path / tag
            base.mkdir()
            cfg = _write_sim_config(str(base / "cfg.json"))
            runs = str(base / "runs")
            dsdir = str(base / "ds")
            model = str(base / "m.ckpt")
            report = str(base / "r.json")
            main(["simulate", "--config", cfg, "--out", runs])
            clean = _write_sim_config(str(base / "clean.json"), n_attackers=0, seed=50)
            main(["simulate", "--config", clean, "--out", runs])
            main(["dataset", "--runs", runs, "--w", "50", "--test-fraction", "0.25", "--out", dsdir])
            main(["train", "--dataset", dsdir, "--epochs", "1", "--out", model])
            main(["eval", "--model", model, "--dataset", dsdir, "--out", report])
            outs.append(open(report, "rb").read())
        assert outs[0] == outs[1]

from __future__ import annotations

import csv
import json

import pytest

from linbreak.cli import main
from linbreak.harness import ExperimentConfig
from linbreak.detect import DetectionConfig
from linbreak.model import Sample
from linbreak.scenarios import eq16_spec, ses_spec


@pytest.fixture
def spec_file(tmp_path):
    p = tmp_path / "spec.json"
    p.write_text(eq16_spec(300, 0.8, 0.4).to_json())
    return p


def run(capsys, *argv) -> str:
    assert main([str(a) for a in argv]) == 0
    return capsys.readouterr().out


class TestCli:
    def test_simulate_and_detect(self, tmp_path, spec_file, capsys):
        sample = tmp_path / "s.csv"
        run(capsys, "simulate", spec_file, "--seed", 2, "--out", sample)
        assert sample.read_text().startswith("t,x1,x2,y1\n")
        assert Sample.from_csv(sample.read_text()).N == 300
        res = json.loads(run(capsys, "detect", sample, "--threshold", 0.2))
        assert res["N"] == 300 and "decision_trace" in res
        assert any(abs(e["theta"] - 0.4) < 0.05 for e in res["estimates"])

    def test_detect_wald(self, tmp_path, spec_file, capsys):
        sample = tmp_path / "s.csv"
        run(capsys, "simulate", spec_file, "--out", sample)
        res = json.loads(run(capsys, "detect", sample, "--threshold", 1e6, "--method", "wald"))
        assert res["changepoint_count"] == 0 and len(res["decision_trace"]) == 1

    def test_detect_per_length(self, tmp_path, capsys):
        sample = tmp_path / "s.csv"
        (tmp_path / "spec.json").write_text(ses_spec(400).to_json())
        run(capsys, "simulate", tmp_path / "spec.json", "--out", sample)
        thr = json.dumps({"lengths": [50, 400], "values": [0.5, 0.2]})
        res = json.loads(run(capsys, "detect", sample, "--threshold", thr))
        assert res["decision_trace"][0]["threshold"] == pytest.approx(0.2)

    def test_detect_needs_threshold(self, tmp_path, spec_file, capsys):
        sample = tmp_path / "s.csv"
        run(capsys, "simulate", spec_file, "--out", sample)
        with pytest.raises(SystemExit):
            main(["detect", str(sample)])

    def test_calibrate_methods_append_rows(self, tmp_path, spec_file, capsys):
        table = tmp_path / "cal.csv"
        mc = json.loads(run(capsys, "calibrate", spec_file, "--trials", 100, "--csv", table))
        assert mc["method"] == "mc" and mc["N"] == 300
        an = json.loads(run(capsys, "calibrate", spec_file, "--method", "analytic", "--lam", 1,
                            "--csv", table))
        assert an["value"] == pytest.approx(3.2 / 300**0.5)
        lim = json.loads(run(capsys, "calibrate", spec_file, "--method", "limit", "--trials", 1000,
                             "--csv", table))
        assert lim["N"] is None and lim["at_N"] == 300
        assert lim["value_at_N"] == pytest.approx(lim["value"] / 300**0.5)
        lines = list(csv.reader(table.open()))
        assert lines[0] == ["N", "level", "value", "stderr", "method"]
        assert [r[4] for r in lines[1:]] == ["mc", "analytic", "limit"]
        assert lines[3][0] == "300"
        assert float(lines[3][2]) == pytest.approx(lim["value_at_N"], rel=1e-5)

    def test_calibrate_analytic_needs_lambda(self, spec_file):
        with pytest.raises(SystemExit):
            main(["calibrate", str(spec_file), "--method", "analytic"])

    def test_experiment(self, tmp_path, capsys):
        cfg = ExperimentConfig(eq16_spec(200, 0.8), DetectionConfig(0.2), trials=20).to_dict()
        cfg["outputs"] = {"csv": str(tmp_path / "r.csv"), "json": str(tmp_path / "r.json")}
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg))
        out = json.loads(run(capsys, "experiment", path))
        assert out["trials_used"] == 20
        assert json.loads((tmp_path / "r.json").read_text())["w_hat"] == out["w_hat"]
        assert (tmp_path / "r.csv").read_text().startswith("threshold,w_hat")
        other = json.loads(run(capsys, "experiment", path, "--seed", 5))
        assert other["trials_used"] == 20

    def test_experiment_spec_path_relative_to_config(self, tmp_path, capsys, monkeypatch):
        cfg = ExperimentConfig(eq16_spec(200, 0.8), DetectionConfig(0.2), trials=20).to_dict()
        inline = json.loads(run(capsys, "experiment", json.dumps(cfg)))
        sub = tmp_path / "cfgs"
        sub.mkdir()
        (sub / "spec.json").write_text(json.dumps(cfg["spec"]))
        cfg["spec"] = "spec.json"
        (sub / "cfg.json").write_text(json.dumps(cfg))
        monkeypatch.chdir(tmp_path)
        out = json.loads(run(capsys, "experiment", sub / "cfg.json"))
        assert out["w_hat"] == inline["w_hat"] and out["trials_used"] == 20

    def test_table(self, tmp_path, capsys):
        out = tmp_path / "t3.csv"
        run(capsys, "table", "--id", "t3", "--scale", 0.05, "--out", out)
        assert out.read_text().splitlines()[0] == "N,p95,p95_stderr,p99,p99_stderr"

    def test_bound(self, capsys):
        params = json.dumps({"functions": ["1 + 0*t", "2.2 + sin(20*pi*t)"], "a": [0, 1],
                             "b": [0.4, 1], "sigma": 1})
        text = run(capsys, "bound", "--case", "regression", "--params", params, "--theta", 0.3,
                   "--eps", 0.05, "--N", 300, 1000)
        lines = text.strip().splitlines()
        assert lines[0] == "N,exponent,lower_bound"
        assert lines[2] == "1000,0.004,0.0183156"

    @pytest.mark.parametrize("case,params", [
        ("trend", {"phi0": "t", "phi1": "t + 1"}),
        ("stochastic", {"f": ["1 + 0*t"], "sigma": ["1 + 0*t"], "a": [1.0], "b": [2.0]}),
    ])
    def test_bound_cases(self, capsys, case, params):
        text = run(capsys, "bound", "--case", case, "--params", json.dumps(params), "--theta", 0.5,
                   "--eps", 0.1, "--N", 100)
        assert float(text.splitlines()[1].split(",")[1]) > 0

"""Command-line surface: subcommands, exit codes, output determinism,
table schemas, and companion figures."""

import json
import math
from pathlib import Path

import pytest

from cogstab.cli import main

GOOD_CONFIG = {
    "symmetric": {
        "n_secondary": 2, "p0": 0.25, "q": 0.5, "beta": 1.0, "beta_p": 1.0,
        "r_j": 1.0, "r_0": 1.0, "r": 1.0, "sigma_tilde_sq": 20.0,
        "sigma0_sq": 1.0, "sigma_sq": 1.0, "sigma_pp_sq": 1.0,
        "p_p": 1.0, "noise": 1.2039728043259361, "pe": 0.2, "pf": 0.1
    },
    "lambda_p": 0.15,
    "p0_cap": "10 dBW",
}

RELAY_CONFIG = {
    "symmetric": {
        "n_secondary": 1, "p0": 1.0, "q": 0.5, "beta": 1.0, "beta_p": 1.0,
        "r_j": 1.0, "r_0": 1.0, "r": 1.0, "sigma_tilde_sq": 8.0,
        "sigma0_sq": 1.0, "sigma_sq": 0.8305835932120471,
        "sigma_pp_sq": 0.8305835932120471, "p_p": 1.0, "noise": 1.0
    },
    "lambda_p": 0.25,
    "relay": True,
}


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(GOOD_CONFIG))
    return str(path)


class TestAnalyze:
    def test_report_fields(self, config_path, capsys):
        assert main(["analyze", "--config", config_path]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["primary_stable"] is True
        assert report["mu_p"] <= report["mu_p_max"]
        assert len(report["secondary_rates"]) == 2
        assert report["constraints"]["p0_max"] == "unbounded"

    def test_relay_report(self, tmp_path, capsys):
        path = tmp_path / "relay.json"
        path.write_text(json.dumps(RELAY_CONFIG))
        assert main(["analyze", "--config", str(path)]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["relay"]["lambda_p_max"] > 0.3
        assert report["relay"]["mu_p_relay"] >= report["mu_p_max"]

    def test_malformed_config_names_field(self, tmp_path, capsys):
        bad = dict(GOOD_CONFIG)
        bad["symmetric"] = dict(bad["symmetric"], q=1.5)
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(bad))
        assert main(["analyze", "--config", str(path)]) == 1
        assert "q" in capsys.readouterr().err

    def test_infeasible_exit_code(self, tmp_path):
        bad = dict(GOOD_CONFIG, lambda_p=0.99)
        path = tmp_path / "infeasible.json"
        path.write_text(json.dumps(bad))
        assert main(["analyze", "--config", str(path)]) == 2

    def test_usage_error_exit_code(self):
        assert main(["analyze"]) == 1
        assert main(["no-such-command"]) == 1


class TestSimulate:
    def test_deterministic_bytes_across_runs_and_jobs(self, config_path, tmp_path):
        outs = []
        for i, jobs in enumerate(("1", "1", "8")):
            out = tmp_path / f"sim{i}.json"
            rc = main(["simulate", "--config", config_path, "--slots", "20000",
                       "--seed", "42", "--replications", "8", "--jobs", jobs,
                       "--out", str(out)])
            assert rc == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1] == outs[2]

    def test_result_contains_rates(self, config_path, tmp_path):
        out = tmp_path / "sim.json"
        assert main(["simulate", "--config", config_path, "--slots", "50000",
                     "--seed", "3", "--out", str(out)]) == 0
        payload = json.loads(out.read_text())
        res = payload["result"]
        assert res["stability_verdict"] == "stable"
        assert 0 < res["empirical_mu_p"] < 1
        assert len(res["empirical_lambda_j"]) == 2

    def test_trace_export(self, config_path, tmp_path):
        trace = tmp_path / "trace.tsv"
        assert main(["simulate", "--config", config_path, "--slots", "2000",
                     "--seed", "1", "--trace", str(trace)]) == 0
        lines = trace.read_text().strip().split("\n")
        assert lines[0].split("\t")[0] == "slot"
        assert len(lines) == 2001


class TestSweep:
    def test_custom_spec_file(self, tmp_path, config_path):
        spec = {
            "name": "toy", "kind": "sweep", "sweep_axis": "Pe",
            "metric": "mu_p", "engines": ["analytic"], "grid": [0.0, 0.3],
            "base": GOOD_CONFIG,
        }
        spec_path = tmp_path / "spec.json"
        spec_path.write_text(json.dumps(spec))
        out = tmp_path / "table.csv"
        assert main(["sweep", str(spec_path), "--out", str(out)]) == 0
        lines = out.read_text().strip().split("\n")
        header = [l for l in lines if not l.startswith("#")][0]
        assert header == "axis_name,axis_value,engine,metric_name,value,stderr,verdict"
        assert (tmp_path / "table.png").exists()

    def test_no_plot_flag(self, tmp_path):
        out = tmp_path / "fig5.csv"
        assert main(["sweep", "fig5", "--out", str(out), "--no-plot"]) == 0
        assert out.exists()
        assert not (tmp_path / "fig5.png").exists()

    def test_sweep_output_deterministic(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["sweep", "fig6", "--out", str(a), "--no-plot"]) == 0
        assert main(["sweep", "fig6", "--out", str(b), "--no-plot"]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_missing_spec_is_usage_error(self, tmp_path):
        assert main(["sweep", str(tmp_path / "absent.json"), "--no-plot"]) == 1


class TestOptimize:
    def test_table_and_plot(self, config_path, tmp_path):
        out = tmp_path / "opt.csv"
        rc = main(["optimize", "--config", config_path, "--lambda-p", "0:0.8:3",
                   "--grid-q", "31", "--grid-p0", "21", "--out", str(out)])
        assert rc == 0
        lines = [l for l in out.read_text().strip().split("\n") if not l.startswith("#")]
        assert lines[0] == "lambda_frac,family,q_opt,p0_opt,sum_throughput,feasible"
        assert len(lines) == 4
        assert (tmp_path / "opt.png").exists()

    def test_family_lists(self, config_path, tmp_path):
        out = tmp_path / "opt.csv"
        rc = main(["optimize", "--config", config_path, "--lambda-p", "0.2",
                   "--n-list", "1,2", "--pe-list", "0.0,0.5",
                   "--grid-q", "21", "--grid-p0", "11", "--no-plot",
                   "--out", str(out)])
        assert rc == 0
        lines = [l for l in out.read_text().strip().split("\n") if not l.startswith("#")]
        assert len(lines) == 5  # header + 2x2 families

    def test_lambda_zero_matches_idle_optimum(self, config_path, tmp_path, capsys):
        # At zero arrival rate the optimum is the perfect-idle formula
        # at the closed-form access probability and the power cap.
        out = tmp_path / "opt.csv"
        rc = main(["optimize", "--config", config_path, "--lambda-p", "0",
                   "--pe-list", "0.0", "--grid-q", "201", "--grid-p0", "21",
                   "--no-plot", "--out", str(out)])
        assert rc == 0
        import cogstab as cs

        cfg = cs.SymmetricConfig(**{k: v for k, v in GOOD_CONFIG["symmetric"].items()})
        cfg = cfg.replace(pe=0.0, p0=10.0, q=cs.optimal_q_perfect(cfg))
        idle_value = 2 * cs.secondary_rate_perfect_symmetric(cfg, 0.0) * (1 - cfg.pf)
        row = [l for l in out.read_text().strip().split("\n") if not l.startswith("#")][1]
        got = float(row.split(",")[4])
        assert got == pytest.approx(idle_value, rel=2e-3)


class TestValidateCommand:
    def test_reduced_battery_passes(self, tmp_path, capsys):
        out = tmp_path / "report.json"
        rc = main(["validate", "--battery", "standard", "--slots", "60000",
                   "--quiet", "--out", str(out)])
        assert rc == 0
        report = json.loads(out.read_text())
        assert report["passed"] is True
        assert all(c["passed"] for c in report["checks"])
        assert "checks passed" in capsys.readouterr().out

"""Command-line interface tests, run in-process through ``cli.main``.

Exit-code contract: 0 success, 1 operation failure (failed assumption,
uncertified gains, divergence, selftest failure), 2 usage/configuration
errors.
"""

import numpy as np
import pytest
import yaml

from coopreg import cli, load_gains, load_trace_csv
from coopreg import reference as ref
from coopreg.config import save_gains
from coopreg.synthesis import GainSet

from conftest import benchmark_config_dict


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / "scenario.yaml"
    with open(path, "w") as fh:
        yaml.safe_dump(benchmark_config_dict(horizon=300), fh, sort_keys=False)
    return path


def write_config(tmp_path, data, name="scenario.yaml"):
    path = tmp_path / name
    with open(path, "w") as fh:
        yaml.safe_dump(data, fh, sort_keys=False)
    return path


# ---------------------------------------------------------------------------
# check


class TestCheck:
    def test_benchmark_passes(self, config_path, capsys):
        assert cli.main(["check", str(config_path)]) == 0
        out = capsys.readouterr().out
        assert out.count("PASS") == 6
        assert "all assumptions satisfied" in out

    def test_unrooted_graph_fails(self, tmp_path, capsys):
        data = benchmark_config_dict()
        data["graph"] = {"n_followers": 2, "edges": [[1, 2, 1.0]]}
        del data["per_agent_e"], data["uncertainties"]  # sized for 4 followers
        path = write_config(tmp_path, data)
        assert cli.main(["check", str(path)]) == 1
        out = capsys.readouterr().out
        assert "FAIL" in out
        assert "assumption(s) violated" in out

    def test_malformed_config_is_usage_error(self, tmp_path, capsys):
        data = benchmark_config_dict()
        data["plant"]["a"] = [[1.0, 1.0], [0.0]]
        path = write_config(tmp_path, data)
        assert cli.main(["check", str(path)]) == 2
        assert "error:" in capsys.readouterr().err

    def test_missing_file_is_usage_error(self, tmp_path, capsys):
        assert cli.main(["check", str(tmp_path / "nope.yaml")]) == 2
        assert "error:" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# synthesize


class TestSynthesize:
    def test_benchmark_synthesis(self, config_path, tmp_path, capsys):
        out_path = tmp_path / "gains.yaml"
        assert cli.main(["synthesize", str(config_path), "--out", str(out_path)]) == 0
        out = capsys.readouterr().out
        assert "gamma = 0.0800" in out
        assert "K_x" in out and "K_z" in out and "L" not in out.split("K_z")[0]
        assert "stable (spectral radius 0.9516" in out

        gains, cert = load_gains(out_path)
        assert cert["stable"] is True
        assert abs(cert["spectral_radius"] - 0.9515988) <= 1e-6
        assert cert["delay"] == 2
        assert gains.gamma == 0.08

    def test_rerun_is_byte_identical(self, config_path, tmp_path):
        p1, p2 = tmp_path / "g1.yaml", tmp_path / "g2.yaml"
        assert cli.main(["synthesize", str(config_path), "--out", str(p1)]) == 0
        assert cli.main(["synthesize", str(config_path), "--out", str(p2)]) == 0
        assert p1.read_bytes() == p2.read_bytes()

    def test_output_mode_prints_observer(self, tmp_path, capsys):
        data = benchmark_config_dict(mode="output")
        path = write_config(tmp_path, data)
        assert cli.main(["synthesize", str(path)]) == 0
        out = capsys.readouterr().out
        assert "gamma_l = 0.1800" in out
        assert "L =" in out

    def test_missing_gamma_is_usage_error(self, tmp_path, capsys):
        data = benchmark_config_dict()
        del data["synthesis"]["gamma"]
        path = write_config(tmp_path, data)
        assert cli.main(["synthesize", str(path)]) == 2
        assert "synthesis.gamma" in capsys.readouterr().err

    def test_uncertified_gains_fail(self, tmp_path, capsys):
        data = benchmark_config_dict()
        data["synthesis"]["gamma"] = 0.9
        path = write_config(tmp_path, data)
        assert cli.main(["synthesize", str(path)]) == 1
        out = capsys.readouterr().out
        assert "NOT stable" in out
        assert "refusing success" in out

    def test_allow_unstable_overrides(self, tmp_path, capsys):
        data = benchmark_config_dict()
        data["synthesis"]["gamma"] = 0.9
        path = write_config(tmp_path, data)
        assert cli.main(["synthesize", str(path), "--allow-unstable"]) == 0
        assert "NOT stable" in capsys.readouterr().out

    def test_auto_tune_recovers_from_large_gamma(self, tmp_path, capsys):
        data = benchmark_config_dict()
        data["synthesis"]["gamma"] = 0.9
        path = write_config(tmp_path, data)
        out_path = tmp_path / "gains.yaml"
        assert cli.main(
            ["synthesize", str(path), "--auto-tune", "--out", str(out_path)]
        ) == 0
        gains, cert = load_gains(out_path)
        assert gains.gamma < 0.9
        assert cert["stable"] is True


# ---------------------------------------------------------------------------
# simulate


class TestSimulate:
    def test_simulate_from_config(self, config_path, capsys):
        assert cli.main(["simulate", str(config_path)]) == 0
        out = capsys.readouterr().out
        assert "law: transformed" in out
        assert out.count("max |e| over final 200 steps") == 4

    def test_simulate_with_gain_file_trace_and_oracle(self, config_path, tmp_path, capsys):
        gains_path = tmp_path / "gains.yaml"
        assert cli.main(["synthesize", str(config_path), "--out", str(gains_path)]) == 0
        capsys.readouterr()

        trace_path = tmp_path / "trace.csv"
        code = cli.main(
            [
                "simulate", str(config_path),
                "--gains", str(gains_path),
                "--trace", str(trace_path),
                "--oracle",
            ]
        )
        assert code == 0
        out = capsys.readouterr().out
        dev_line = [ln for ln in out.splitlines() if "oracle" in ln][0]
        dev = float(dev_line.rsplit("=", 1)[1])
        assert dev <= 1e-9

        loaded = load_trace_csv(trace_path)
        assert loaded.horizon == 300
        assert loaded.x.shape == (300, 4, 2)

    def test_delayed_law_runs(self, config_path, capsys):
        assert cli.main(["simulate", str(config_path), "--law", "delayed"]) == 0
        assert "law: delayed" in capsys.readouterr().out

    def test_oracle_requires_transformed_law(self, config_path, capsys):
        code = cli.main(["simulate", str(config_path), "--law", "delayed", "--oracle"])
        assert code == 2
        assert "transformed" in capsys.readouterr().err

    def test_divergent_run_exits_one(self, config_path, tmp_path, capsys):
        wild = GainSet(
            k_x=np.array([[1e6, 1e6]]), k_z=np.array([[0.0, 0.0]]), gamma=0.1, nu=1.0
        )
        gains_path = tmp_path / "wild.yaml"
        save_gains(wild, gains_path)
        assert cli.main(["simulate", str(config_path), "--gains", str(gains_path)]) == 1
        assert "diverged" in capsys.readouterr().err

    def test_zero_horizon_trace_is_header_only(self, tmp_path, capsys):
        data = benchmark_config_dict(horizon=0)
        path = write_config(tmp_path, data)
        trace_path = tmp_path / "trace.csv"
        assert cli.main(["simulate", str(path), "--trace", str(trace_path)]) == 0
        loaded = load_trace_csv(trace_path)
        assert loaded.horizon == 0


# ---------------------------------------------------------------------------
# sweep


class TestSweep:
    def test_table_and_csv(self, config_path, tmp_path, capsys):
        out_path = tmp_path / "sweep.csv"
        code = cli.main(
            ["sweep", str(config_path), "--gammas", "0.32,0.16,0.08", "--out", str(out_path)]
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "0.3200" in out and "0.0800" in out

        lines = out_path.read_text().strip().splitlines()
        assert lines[0] == "gamma,gain_norm,spectral_radius,stable"
        assert len(lines) == 4
        rows = [ln.split(",") for ln in lines[1:]]
        # gain norm shrinks with gamma; the small-gamma rows certify
        norms = [float(r[1]) for r in rows]
        assert norms[0] > norms[1] > norms[2]
        assert [r[3] for r in rows] == ["0", "1", "1"]
        assert abs(float(rows[2][2]) - 0.9515988) <= 1e-6

    def test_bad_gamma_rejected_by_parser(self, config_path, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["sweep", str(config_path), "--gammas", "0.3,1.5"])
        assert exc.value.code == 2
        assert "must lie in (0, 1)" in capsys.readouterr().err

    def test_empty_gamma_list_rejected(self, config_path, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["sweep", str(config_path), "--gammas", ","])
        assert exc.value.code == 2


# ---------------------------------------------------------------------------
# selftest


class TestSelftest:
    def test_selftest_reports_known_inconsistency(self, capsys):
        # The stated feedback parameters do not regenerate the recorded
        # benchmark gain (a documented data inconsistency), so exactly
        # one of the six stages fails and the exit code is 1.
        assert cli.main(["selftest"]) == 1
        out = capsys.readouterr().out
        assert "5/6 stages passed" in out
        assert "FAIL  feedback gain reproduction" in out
        assert "recalibrated gamma=0.11" in out
        assert "PASS  observer gain reproduction" in out
        assert "PASS  stability certificates" in out
        assert "PASS  state-feedback convergence" in out
        assert "PASS  output-feedback convergence" in out

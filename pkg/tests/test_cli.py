import json
import math

import numpy as np
import pytest

from siftless.cli import main
from siftless.attacks import pulse_class_keyrate
from siftless.strategies import poisson_pmf


def run_json(capsys, argv):
    code = main(argv + ["--json"])
    captured = capsys.readouterr()
    assert code == 0, captured.err
    return json.loads(captured.out)


class TestKeyrate:
    def test_dsp_headline(self, capsys):
        report = run_json(capsys, ["keyrate", "--m", "4", "--mu", "1", "--transmission", "0.001", "--dsp"])
        assert report["outputs"]["keyrate_over_t"] == pytest.approx(0.2987, abs=1e-3)
        assert report["inputs"]["dsp"] is True

    def test_zero_transmission(self, capsys):
        report = run_json(capsys, ["keyrate", "--m", "4", "--mu", "0.1", "--transmission", "0"])
        assert report["outputs"]["keyrate"] == 0.0

    def test_lossless_budget(self, capsys):
        report = run_json(capsys, ["keyrate", "--m", "4", "--mu", "0.1", "--transmission", "1"])
        expected = sum(poisson_pmf(n, 0.1) * pulse_class_keyrate(n, 4) for n in range(1, 30))
        assert report["outputs"]["keyrate"] == pytest.approx(expected, abs=1e-9)

    def test_breakdown_artifact(self, capsys, tmp_path):
        report = run_json(capsys, [
            "keyrate", "--m", "4", "--mu", "0.2", "--transmission", "0.5",
            "--breakdown", "--out", str(tmp_path)])
        path = tmp_path / "keyrate_breakdown.csv"
        assert str(path) in report["artifacts"]
        lines = path.read_text().splitlines()
        assert lines[0].startswith("# command: siftless keyrate")
        assert lines[1].split(",")[0] == "n"

    def test_attenuation_flag(self, capsys):
        by_t = run_json(capsys, ["keyrate", "--m", "4", "--mu", "1", "--transmission", "0.001", "--dsp"])
        by_db = run_json(capsys, ["keyrate", "--m", "4", "--mu", "1", "--attenuation-db", "30", "--dsp"])
        assert by_db["outputs"]["keyrate"] == pytest.approx(by_t["outputs"]["keyrate"], rel=1e-12)

    def test_missing_transmission_is_usage_error(self, capsys):
        assert main(["keyrate", "--m", "4", "--mu", "1"]) == 2
        assert "transmission" in capsys.readouterr().err

    def test_bad_flag_value_is_usage_error(self, capsys):
        assert main(["keyrate", "--m", "4", "--mu", "abc", "--transmission", "0.1"]) == 2


class TestScalarCommands:
    def test_tc(self, capsys):
        report = run_json(capsys, ["tc", "--m", "4", "--mu", "0.1"])
        assert report["outputs"]["tc_asymptotic"] == pytest.approx(8.333e-4, rel=1e-3)
        assert report["outputs"]["relative_gap"] < 0.1

    def test_qber(self, capsys):
        report = run_json(capsys, ["qber", "--m", "4"])
        assert report["outputs"]["epsilon_critical"] == pytest.approx(0.0614, abs=5e-4)

    def test_optimize_mu(self, capsys):
        report = run_json(capsys, [
            "optimize-mu", "--strategy", "dsp", "--m", "4", "--transmission", "0.001"])
        assert report["outputs"]["mu_opt"] == pytest.approx(1.4794, abs=0.01)
        assert report["outputs"]["keyrate_over_t"] == pytest.approx(0.3237, abs=1e-3)


class TestConfigPrecedence:
    def test_flags_override_config(self, capsys, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("m=4\nmu=9.0\ntransmission=0.001\ndsp=true\n")
        report = run_json(capsys, ["keyrate", "--config", str(cfg), "--mu", "1"])
        assert report["inputs"]["mu"] == 1.0
        assert report["inputs"]["transmission"] == 0.001
        assert report["inputs"]["dsp"] is True

    def test_config_over_defaults(self, capsys, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("m=5\nmu=0.3\ntransmission=0.2\n")
        report = run_json(capsys, ["keyrate", "--config", str(cfg)])
        assert report["inputs"]["m"] == 5
        assert report["inputs"]["mu"] == 0.3

    def test_malformed_config(self, capsys, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("mu 1.0\n")
        assert main(["keyrate", "--config", str(cfg), "--transmission", "0.1"]) == 2


class TestFigure:
    def test_fig3_non_monotone_marginal(self, capsys, tmp_path):
        run_json(capsys, ["figure", "fig3", "--m", "4", "--out", str(tmp_path)])
        rows = np.loadtxt(tmp_path / "fig3_m4.csv", delimiter=",", skiprows=2)
        n = rows[:, 0]
        marginal = rows[:, 2]
        assert marginal[list(n).index(3)] > marginal[list(n).index(2)]

    def test_fig4_artifacts(self, capsys, tmp_path):
        report = run_json(capsys, [
            "figure", "fig4", "--m", "3,4", "--mu", "0.1",
            "--t-min", "0.001", "--t-max", "0.5", "--points", "7", "--out", str(tmp_path)])
        names = {p.split("/")[-1] for p in report["artifacts"]}
        assert {"fig4_m3.csv", "fig4_m4.csv", "fig4_bb84.csv", "fig4_tc.csv", "fig4.png"} <= names
        tc_rows = np.loadtxt(tmp_path / "fig4_tc.csv", delimiter=",", skiprows=2)
        assert tc_rows.shape == (2, 3)

    def test_fig8_high_loss_m4(self, capsys, tmp_path):
        run_json(capsys, [
            "figure", "fig8", "--m", "4", "--t-min", "0.001", "--t-max", "0.01",
            "--points", "3", "--out", str(tmp_path)])
        rows = np.loadtxt(tmp_path / "fig8_m4.csv", delimiter=",", skiprows=2)
        assert rows[0, 2] == pytest.approx(1.5, abs=0.05)  # highest attenuation first

    def test_deterministic_csv_bytes(self, capsys, tmp_path):
        argv = ["figure", "fig1", "--m", "5", "--out", str(tmp_path), "--no-plot"]
        main(argv)
        first = {p.name: p.read_bytes() for p in tmp_path.iterdir()}
        main(argv)
        capsys.readouterr()
        second = {p.name: p.read_bytes() for p in tmp_path.iterdir()}
        assert first == second and first

    def test_unknown_figure(self, capsys):
        assert main(["figure", "fig99"]) == 2

    def test_no_plot_skips_png(self, capsys, tmp_path):
        report = run_json(capsys, ["figure", "fig2", "--out", str(tmp_path), "--no-plot"])
        assert not any(p.endswith(".png") for p in report["artifacts"])


class TestSimulate:
    def test_comparison_table(self, capsys, tmp_path):
        report = run_json(capsys, [
            "simulate", "--m", "3", "--mu", "0.5", "--transmission", "0.5",
            "--pulses", "200000", "--seed", "8", "--out", str(tmp_path)])
        path = tmp_path / "simulate_comparison.csv"
        assert str(path) in report["artifacts"]
        rows = np.loadtxt(path, delimiter=",", skiprows=2)
        assert rows.shape == (9, 6)
        sigmas = rows[rows[:, 4] > 0][:, 5]
        assert np.all(sigmas < 6.0)
        expected_yield = 1.0 - math.exp(-0.25)
        assert report["outputs"]["empirical_yield"] == pytest.approx(expected_yield, abs=0.005)

    def test_eve_run_is_errorless(self, capsys, tmp_path):
        report = run_json(capsys, [
            "simulate", "--m", "4", "--mu", "0.1", "--transmission", "0.1",
            "--pulses", "100000", "--eve", "--seed", "4", "--out", str(tmp_path)])
        assert report["outputs"]["estimated_qber"] == 0.0

    def test_too_few_clicks_skips_table(self, capsys, tmp_path):
        report = run_json(capsys, [
            "simulate", "--m", "4", "--mu", "0.05", "--transmission", "0.01",
            "--pulses", "1000", "--seed", "4", "--out", str(tmp_path)])
        assert report["artifacts"] == []
        assert "skipped" in report["outputs"]["comparison_table"]


class TestDecoyEstimate:
    def _write(self, tmp_path, rows, header=False):
        path = tmp_path / "decoy.csv"
        lines = (["intensity,yield"] if header else []) + [f"{a},{b}" for a, b in rows]
        path.write_text("\n".join(lines) + "\n")
        return path

    def test_roundtrip(self, capsys, tmp_path):
        from siftless.strategies import dsp_yield

        intensities = [0.1, 0.5, 1.0]
        yields = [sum(poisson_pmf(n, mu) * dsp_yield(n, 0.2) for n in range(3)) for mu in intensities]
        path = self._write(tmp_path, zip(intensities, yields), header=True)
        report = run_json(capsys, ["decoy-estimate", str(path)])
        assert report["outputs"]["estimated_yields"][1] == pytest.approx(0.2, abs=1e-6)
        assert report["outputs"]["estimated_yields"][2] == pytest.approx(0.36, abs=1e-6)
        assert report["outputs"]["residual"] <= 1e-8

    def test_duplicate_intensities_exit_code(self, capsys, tmp_path):
        path = self._write(tmp_path, [(1.0, 0.3), (1.0, 0.3)])
        assert main(["decoy-estimate", str(path)]) == 3
        assert "ill-conditioned" in capsys.readouterr().err

    def test_missing_file_exit_code(self, capsys, tmp_path):
        assert main(["decoy-estimate", str(tmp_path / "nope.csv")]) == 4

    def test_empty_file_usage_error(self, capsys, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("# nothing\n")
        assert main(["decoy-estimate", str(path)]) == 2


class TestUsage:
    def test_no_command(self, capsys):
        assert main([]) == 2

    def test_unknown_command(self, capsys):
        assert main(["frobnicate"]) == 2

    def test_version(self, capsys):
        assert main(["--version"]) == 0
        assert "siftless" in capsys.readouterr().out

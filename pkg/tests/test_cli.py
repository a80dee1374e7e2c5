"""Command-line interface: artifacts, exit codes, determinism."""

import json
import math

import numpy as np
import pytest

from simqp.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def parse_csv(text):
    lines = [ln for ln in text.splitlines() if ln]
    header = lines[0].split(",")
    rows = [[float(tok) for tok in ln.split(",")] for ln in lines[1:]]
    return header, rows


class TestSweep:
    def test_error_columns(self, capsys):
        code, out, _ = run(
            capsys, "sweep", "--family", "y0", "--nu-grid", "0.25,0.5,0.75"
        )
        assert code == 0
        header, rows = parse_csv(out)
        eq_index = header.index("eps_q")
        got = [row[eq_index] ** 2 for row in rows]
        np.testing.assert_allclose(got, [0.75, 0.5, 0.25], rtol=1e-12)

    def test_default_grid_passes(self, capsys):
        code, out, _ = run(capsys, "sweep", "--family", "x")
        assert code == 0
        _, rows = parse_csv(out)
        assert len(rows) == 99
        residuals = [row[4] for row in rows]
        assert max(abs(r) for r in residuals) <= 1e-8

    def test_families_share_error_columns(self, capsys):
        outputs = []
        for family in ("x", "z"):
            code, out, _ = run(
                capsys, "sweep", "--family", family, "--nu-grid", "0.2,0.5,0.8"
            )
            assert code == 0
            _, rows = parse_csv(out)
            outputs.append([row[1:3] for row in rows])
        np.testing.assert_allclose(outputs[0], outputs[1], atol=1e-12)

    def test_empty_grid_is_usage_error(self, capsys):
        code, _, err = run(capsys, "sweep", "--nu-grid", "")
        assert code == 2
        assert "empty" in err

    def test_arthurs_kelly_fails_sweep(self, capsys):
        code, out, _ = run(capsys, "sweep", "--family", "ak", "--nu-grid", "0.5")
        assert code == 1
        _, rows = parse_csv(out)
        assert rows[0][4] > 0.01  # comparator misses the bound

    def test_json_format(self, capsys):
        code, out, _ = run(
            capsys, "sweep", "--nu-grid", "0.5", "--format", "json"
        )
        assert code == 0
        payload = json.loads(out)
        assert payload[0]["nu"] == 0.5
        assert payload[0]["eps_q"] == pytest.approx(math.sqrt(0.5))


class TestCheck:
    def test_family_passes(self, capsys):
        code, out, _ = run(capsys, "check", "--family", "y2", "--nu", "0.5")
        assert code == 0
        payload = json.loads(out)
        assert payload["passes"]["all"] is True
        assert abs(payload["bo_residual"]) < 1e-10

    def test_arthurs_kelly_condition_iii_recorded(self, capsys):
        code, out, _ = run(capsys, "check", "--family", "ak", "--nu", "0.5")
        assert code == 1
        payload = json.loads(out)
        assert payload["passes"]["iii"] is False
        assert payload["cond_iii"]["sum_minus_one"] == pytest.approx(1.0)

    def test_invalid_nu_writes_nothing(self, capsys, tmp_path):
        out_file = tmp_path / "report.json"
        code, _, err = run(
            capsys, "check", "--nu", "1.5", "--out", str(out_file)
        )
        assert code == 2
        assert "nu" in err
        assert not out_file.exists()

    def test_needs_single_nu(self, capsys):
        code, _, err = run(capsys, "check", "--nu-grid", "0.2,0.4")
        assert code == 2
        assert "one nu" in err


class TestFrontier:
    def test_midpoint_of_curve(self, capsys):
        code, out, _ = run(capsys, "frontier", "--nu-grid", "0.5")
        assert code == 0
        _, rows = parse_csv(out)
        nu, eps_q, eps_p, hyp, quarter = rows[0]
        assert eps_q == pytest.approx(math.sqrt(0.5), rel=1e-12)
        assert eps_p == pytest.approx(math.sqrt(0.125), rel=1e-12)
        assert hyp == pytest.approx(0.5 / eps_q)
        assert quarter == pytest.approx(0.25 / eps_q)

    def test_endpoints_approach_excluded_points(self, capsys):
        code, out, _ = run(capsys, "frontier", "--nu-grid", "0.001,0.999")
        assert code == 0
        _, rows = parse_csv(out)
        assert rows[0][1] == pytest.approx(1.0, abs=0.01)  # eps_q -> sigma(Q1)
        assert rows[0][2] == pytest.approx(0.0, abs=0.02)  # eps_p -> 0
        assert rows[1][1] == pytest.approx(0.0, abs=0.05)
        assert rows[1][2] == pytest.approx(0.5, abs=0.01)  # -> sigma(P1)

    def test_curve_below_heisenberg_hyperbola(self, capsys):
        code, out, _ = run(capsys, "frontier")
        assert code == 0
        _, rows = parse_csv(out)
        assert len(rows) == 99
        for row in rows:
            assert row[2] < row[3]  # eps_p strictly below the hyperbola value


class TestSample:
    def test_monte_carlo_q_pair(self, capsys):
        n = 200_000
        code, out, _ = run(
            capsys,
            "sample",
            "--family",
            "y0",
            "--nu",
            "0.5",
            "--which",
            "q-pair",
            "--n",
            str(n),
            "--seed",
            "42",
        )
        assert code == 0
        summary = json.loads(out)
        analytic = summary["analytic_gauss_error"]
        assert analytic == pytest.approx(math.sqrt(0.5), rel=1e-12)
        # difference variance is 0.5, so Var(d^2) = 2 * 0.25
        se = math.sqrt(2.0 * 0.25 / n) / (2.0 * analytic)
        assert abs(summary["empirical_gauss_error"] - analytic) < 4.0 * se
        assert summary["low_confidence"] is False
        assert max(abs(z) for z in summary["mean_z_scores"]) < 5.0

    def test_meter_pair_gauss_error_value(self, capsys):
        # meters joint at nu=1/2: Var(z)=0.5, Var(w)=0.125 independent,
        # so the analytic rms difference is sqrt(0.625)
        code, out, _ = run(
            capsys, "sample", "--nu", "0.5", "--which", "meters", "--n", "10"
        )
        assert code == 0
        summary = json.loads(out)
        assert summary["analytic_gauss_error"] == pytest.approx(
            math.sqrt(0.625), rel=1e-12
        )

    def test_single_draw_marked_low_confidence(self, capsys, tmp_path):
        out_file = tmp_path / "draws.csv"
        code, out, _ = run(
            capsys,
            "sample",
            "--nu",
            "0.5",
            "--n",
            "1",
            "--out",
            str(out_file),
        )
        assert code == 0
        assert json.loads(out)["low_confidence"] is True
        lines = out_file.read_text().splitlines()
        assert len(lines) == 2  # header plus the single draw

    def test_identical_seeds_identical_files(self, capsys, tmp_path):
        paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
        for path in paths:
            code, _, _ = run(
                capsys,
                "sample",
                "--nu",
                "0.3",
                "--n",
                "500",
                "--seed",
                "77",
                "--out",
                str(path),
            )
            assert code == 0
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_unknown_joint_rejected(self, capsys):
        code, _, err = run(
            capsys, "sample", "--nu", "0.5", "--which", "pq-pair", "--n", "5"
        )
        assert code == 2
        assert "unknown joint" in err


class TestPosterior:
    def test_pointwise_outcome(self, capsys):
        code, out, _ = run(
            capsys, "posterior", "--family", "y0", "--nu", "0.5", "--y", "0,0"
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["mean"] == [0.0, 0.0]
        assert payload["var_q"] == pytest.approx(1.0)
        assert payload["var_p"] == pytest.approx(0.25)
        assert payload["uncertainty_product"] == pytest.approx(0.25)

    def test_region_matches_propagated_marginals(self, capsys):
        code, out, _ = run(
            capsys,
            "posterior",
            "--family",
            "z",
            "--nu",
            "0.5",
            "--region=-50,50,-50,50",
        )
        assert code == 0
        payload = json.loads(out)
        # full plane proxy: Var(Q) = (2-nu)/nu, Var(P) = (1+nu)/(1-nu)*0.25
        assert payload["mean"] == pytest.approx([0.0, 0.0], abs=1e-12)
        assert payload["cov"][0][0] == pytest.approx(3.0, rel=1e-6)
        assert payload["cov"][1][1] == pytest.approx(0.75, rel=1e-6)

    def test_unsupported_family(self, capsys):
        code, _, err = run(
            capsys, "posterior", "--family", "x", "--nu", "0.5", "--y", "0,0"
        )
        assert code == 2
        assert "posterior" in err

    def test_requires_exactly_one_mode(self, capsys):
        code, _, err = run(capsys, "posterior", "--family", "y0", "--nu", "0.5")
        assert code == 2
        code, _, err = run(
            capsys,
            "posterior",
            "--family",
            "y0",
            "--nu",
            "0.5",
            "--y",
            "0,0",
            "--region",
            "0,1,0,1",
        )
        assert code == 2


class TestConfigFile:
    def test_flags_override_file(self, capsys, tmp_path):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"family": "z", "nu": 0.25, "sigma1": 2.0}))
        code, out, _ = run(
            capsys, "sweep", "--config", str(cfg), "--family", "y0"
        )
        assert code == 0
        header, rows = parse_csv(out)
        assert len(rows) == 1
        assert rows[0][0] == 0.25
        # sigma1 = 2 from the file: eps_q^2 = (1 - 0.25) * 4
        assert rows[0][header.index("eps_q")] ** 2 == pytest.approx(3.0, rel=1e-12)

    def test_unknown_family_rejected(self, capsys):
        code, _, err = run(capsys, "sweep", "--family", "bogus")
        assert code == 2
        assert "unknown family" in err

    def test_nu_and_grid_conflict(self, capsys):
        code, _, err = run(
            capsys, "sweep", "--nu", "0.5", "--nu-grid", "0.1,0.2"
        )
        assert code == 2
        assert "mutually exclusive" in err


class TestOutputFiles:
    def test_sweep_csv_written_with_17_digits(self, capsys, tmp_path):
        out_file = tmp_path / "sweep.csv"
        code, _, _ = run(
            capsys,
            "sweep",
            "--family",
            "y0",
            "--nu-grid",
            "0.3",
            "--out",
            str(out_file),
        )
        assert code == 0
        text = out_file.read_text(encoding="utf-8")
        assert text.endswith("\n")
        value = text.splitlines()[1].split(",")[1]
        assert float(value) == pytest.approx(math.sqrt(0.7), rel=1e-15)
        assert len(value.replace(".", "").replace("-", "").lstrip("0")) >= 16

    def test_repeated_runs_byte_identical(self, capsys, tmp_path):
        paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
        for path in paths:
            run(capsys, "frontier", "--out", str(path))
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_out_dir_env_rebases_relative_paths(self, capsys, tmp_path, monkeypatch):
        monkeypatch.setenv("SIMQP_OUT_DIR", str(tmp_path))
        code, _, _ = run(
            capsys, "frontier", "--nu-grid", "0.5", "--out", "curve.csv"
        )
        assert code == 0
        assert (tmp_path / "curve.csv").exists()

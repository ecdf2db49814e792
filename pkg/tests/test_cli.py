"""CLI subcommands: files, determinism, exit codes, config precedence."""

import json

import numpy as np

from hyqmom.cli import EXIT_OK, EXIT_UNREALIZABLE, main


def _read_csv(path):
    meta, header, rows = {}, None, []
    for line in path.read_text().splitlines():
        if line.startswith("#"):
            if ":" in line:
                key, _, val = line[1:].partition(":")
                meta[key.strip()] = val.strip()
            continue
        if header is None:
            header = line.split(",")
            continue
        rows.append(line.split(","))
    return meta, header, rows


class TestSimulate:
    def test_outputs_and_summary(self, tmp_path):
        rc = main(
            ["simulate", "--n", "2", "--cells", "60", "--t-end", "0.01", "--out", str(tmp_path)]
        )
        assert rc == EXIT_OK
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["steps"] > 0
        assert summary["max_abs_eigenvalue"] > 2.0
        assert len(summary["error_norms"]) == 5
        assert max(summary["budget_residual"]) < 1e-12
        meta, header, rows = _read_csv(tmp_path / "solution.csv")
        assert header[:6] == ["x", "M0", "M1", "M2", "M3", "M4"]
        assert "S3" in header and "M0_exact" in header and "lambda_max" in header
        assert len(rows) == 60

    def test_byte_identical_reruns(self, tmp_path):
        args = ["simulate", "--n", "1", "--cells", "40", "--t-end", "0.005"]
        main(args + ["--out", str(tmp_path / "a")])
        main(args + ["--out", str(tmp_path / "b")])
        assert (tmp_path / "a/solution.csv").read_bytes() == (
            tmp_path / "b/solution.csv"
        ).read_bytes()

    def test_t_end_zero_matches_initial_condition(self, tmp_path):
        rc = main(
            ["simulate", "--n", "1", "--cells", "20", "--t-end", "0", "--out", str(tmp_path)]
        )
        assert rc == EXIT_OK
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["steps"] == 0
        np.testing.assert_allclose(summary["error_norms"], 0.0, atol=1e-15)

    def test_config_file_with_flag_override(self, tmp_path):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"n": 1, "cells": 30, "t_end": 0.001}))
        rc = main(
            ["simulate", "--config", str(cfg), "--cells", "24", "--out", str(tmp_path)]
        )
        assert rc == EXIT_OK
        _, _, rows = _read_csv(tmp_path / "solution.csv")
        assert len(rows) == 24  # flag wins over file

    def test_qmom_closure_flag(self, tmp_path):
        rc = main(
            ["simulate", "--n", "2", "--closure", "qmom", "--cells", "40",
             "--t-end", "0.005", "--out", str(tmp_path)]
        )
        assert rc == EXIT_OK
        _, header, _ = _read_csv(tmp_path / "solution.csv")
        assert "M3" in header and "M4" not in header  # qmom state is M_0..M_3


class TestReference:
    def test_antisymmetry_columns(self, tmp_path):
        rc = main(
            ["reference", "--t", "0.1", "--k-max", "4", "--points", "32",
             "--out", str(tmp_path)]
        )
        assert rc == EXIT_OK
        _, header, rows = _read_csv(tmp_path / "reference.csv")
        data = np.array([[float(v) for v in row] for row in rows])
        x, m1 = data[:, 0], data[:, 2]
        np.testing.assert_allclose(m1, -m1[::-1], atol=1e-12)
        assert header == ["x", "M0", "M1", "M2", "M3", "M4"]

    def test_t_zero_is_step(self, tmp_path):
        main(["reference", "--t", "0", "--k-max", "2", "--points", "10", "--out", str(tmp_path)])
        _, _, rows = _read_csv(tmp_path / "reference.csv")
        data = np.array([[float(v) for v in row] for row in rows])
        np.testing.assert_allclose(data[:5, 1], 1.0)
        np.testing.assert_allclose(data[:5, 2], 1.0)
        np.testing.assert_allclose(data[5:, 2], -1.0)


class TestRoots:
    def test_n2_panel(self, tmp_path):
        rc = main(
            ["roots", "--n", "2", "--s", "-1", "--sweep", "0.1", "4", "8",
             "--out", str(tmp_path)]
        )
        assert rc == EXIT_OK
        _, header, rows = _read_csv(tmp_path / "roots.csv")
        assert header == ["h", "S4", "q1", "q2", "r1", "r2", "r3"]
        data = np.array([[float(v) for v in row] for row in rows])
        expect_q = sorted([0.5 * (-1 - np.sqrt(5)), 0.5 * (-1 + np.sqrt(5))])
        for row in data:
            np.testing.assert_allclose(row[2:4], expect_q, rtol=1e-10)
        # outer fan widens monotonically with H_4
        spans = data[:, 6] - data[:, 4]
        assert np.all(np.diff(spans) > 0)

    def test_n3_fixture_panel(self, tmp_path):
        rc = main(
            ["roots", "--n", "3", "--s=-1,5,-8", "--sweep", "1", "30", "5",
             "--out", str(tmp_path)]
        )
        assert rc == EXIT_OK
        _, header, rows = _read_csv(tmp_path / "roots.csv")
        data = np.array([[float(v) for v in row] for row in rows])
        # interlacing holds along the whole sweep
        for row in data:
            q, r = row[2:5], row[5:9]
            merged = np.empty(7)
            merged[0::2] = r
            merged[1::2] = q
            assert np.all(np.diff(merged) > 0)

    def test_unrealizable_sweep_exits_2(self, tmp_path):
        rc = main(
            ["roots", "--n", "2", "--s", "-1", "--sweep", "-1", "1", "3",
             "--out", str(tmp_path)]
        )
        assert rc == EXIT_UNREALIZABLE

    def test_unrealizable_fixed_moments_exit_2(self, tmp_path):
        # S_4 = 0.2 < 1 + S_3^2 makes the base vector unrealizable
        rc = main(
            ["roots", "--n", "3", "--s=-1,0.2,0", "--sweep", "0.1", "1", "2",
             "--out", str(tmp_path)]
        )
        assert rc == EXIT_UNREALIZABLE


class TestConvergence:
    def test_table_layout(self, tmp_path):
        rc = main(
            ["convergence", "--n-list", "1,2", "--cells", "50", "--t-end", "0.005",
             "--out", str(tmp_path)]
        )
        assert rc == EXIT_OK
        _, header, rows = _read_csv(tmp_path / "convergence.csv")
        assert header[0] == "n"
        assert header[2:] == [f"err_M{k}" for k in range(5)]
        assert len(rows) == 2
        assert rows[0][5] == "" and rows[0][6] == ""  # blanks beyond 2n for n=1
        assert rows[1][5] != "" and rows[1][6] != ""


class TestVerify:
    def test_quick_suites_pass(self, capsys):
        rc = main(["verify", "--samples", "25", "--seed", "3"])
        out = capsys.readouterr().out
        assert rc == EXIT_OK
        assert out.count("PASS") == 6
        assert "FAIL" not in out

    def test_report_file(self, tmp_path):
        rc = main(["verify", "--samples", "10", "--out", str(tmp_path)])
        assert rc == EXIT_OK
        report = json.loads((tmp_path / "verify.json").read_text())
        assert len(report) == 6
        assert all(r["passed"] for r in report)

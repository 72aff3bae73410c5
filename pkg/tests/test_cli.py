"""CLI behavior: runs on the bundled sample, synthesis, sweeps, errors."""

import csv
import os
import shutil

import pytest

from ecoshift.cli import _packaged, main


def run_cli(*argv):
    return main(list(argv))


class TestRunCommand:
    def test_local_self_baseline(self, tmp_path, capsys):
        rc = run_cli("run", "--scenario", "custom", "--scheduler", "local",
                     "--theta", "1,0,0", "--out", str(tmp_path))
        assert rc == 0
        for name in ("ledger.csv", "decisions.csv", "sweep.csv"):
            assert (tmp_path / name).exists()
        with open(tmp_path / "sweep.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert rows[0]["carbon_mean"] == "0.000000"
        assert "scheduler=local" in capsys.readouterr().out

    def test_reruns_are_byte_identical(self, tmp_path):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        for out in (out_a, out_b):
            rc = run_cli("run", "--scheduler", "sp", "--theta", "0.333,0.333,0.334",
                         "--mae", "0", "--seed", "0", "--out", str(out))
            assert rc == 0
        for name in ("ledger.csv", "decisions.csv", "sweep.csv"):
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes()

    def test_mixed_theta_accepted(self, tmp_path):
        rc = run_cli("run", "--scheduler", "s", "--theta", "0.333,0.333,0.334",
                     "--out", str(tmp_path))
        assert rc == 0

    def test_distinct_seeds_distinct_decisions(self, tmp_path):
        blobs = set()
        for seed in range(6):
            out = tmp_path / f"seed{seed}"
            rc = run_cli("run", "--scheduler", "stp", "--theta", "1,0,0", "--mae", "0.1",
                         "--dt", "4", "--seed", str(seed), "--out", str(out))
            assert rc == 0
            blobs.add((out / "decisions.csv").read_bytes())
        assert len(blobs) == 6

    def test_bad_scheduler_is_one_line_error(self, tmp_path, capsys):
        rc = run_cli("run", "--scheduler", "warp", "--out", str(tmp_path))
        assert rc == 2
        err = capsys.readouterr().err.strip()
        assert err.startswith("error:") and "\n" not in err

    def test_bad_theta_rejected(self, tmp_path, capsys):
        rc = run_cli("run", "--theta", "1,0", "--out", str(tmp_path))
        assert rc == 2
        assert capsys.readouterr().err.startswith("error:")

    def test_preset_without_trace_fails(self, tmp_path, capsys):
        rc = run_cli("run", "--scenario", "aws-bigdata", "--season", "winter",
                     "--out", str(tmp_path))
        assert rc == 2
        assert "synth" in capsys.readouterr().err


class TestSynthCommand:
    def test_faas_count_arithmetic(self, tmp_path):
        out = tmp_path / "faas.csv"
        rc = run_cli("synth", "--scenario", "faas", "--requests-per-day", "100",
                     "--days", "7", "--seed", "0", "--out", str(out))
        assert rc == 0
        with open(out) as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 700
        assert all(r["deadline_min"] == r["arrival_min"] for r in rows)
        assert all(r["size_gb"] == "0.000000" for r in rows)

    def test_bigdata_invariants(self, tmp_path):
        out = tmp_path / "big.csv"
        rc = run_cli("synth", "--scenario", "bigdata", "--total", "300", "--days", "1",
                     "--dt", "2", "--seed", "1", "--out", str(out))
        assert rc == 0
        with open(out) as fh:
            rows = list(csv.DictReader(fh))
        assert rows
        for r in rows:
            assert int(r["arrival_min"]) <= int(r["deadline_min"])
            assert float(r["runtime_min"]) > 0
            assert 0.0 <= float(r["utilization"]) <= 1.0

    def test_bigdata_trace_feeds_preset_run(self, tmp_path):
        trace = tmp_path / "big.csv"
        rc = run_cli("synth", "--scenario", "bigdata", "--total", "150", "--days", "1",
                     "--seed", "2", "--out", str(trace))
        assert rc == 0
        grid_dir = tmp_path / "grids"
        grid_dir.mkdir()
        # Synthetic stand-ins for the five grids the preset regions key into.
        for grid in ("pjm", "caiso", "de", "uk", "sw"):
            shutil.copy(_packaged("sample/grids/grid-a.csv"), grid_dir / f"{grid}.csv")
        out = tmp_path / "run"
        rc = run_cli("run", "--scenario", "aws-bigdata", "--trace", str(trace),
                     "--grid-dir", str(grid_dir), "--start", "2024-01-15T00:00:00",
                     "--end", "2024-01-16T00:00:00", "--scheduler", "sp",
                     "--theta", "1,0,0", "--out", str(out))
        assert rc == 0
        assert (out / "ledger.csv").exists()


class TestSweepCommand:
    def test_degenerate_sweep_single_row(self, tmp_path):
        out = tmp_path / "sweep"
        rc = run_cli("sweep", "--schedulers", "sp", "--maes", "0.1",
                     "--thetas", "1,0,0", "--seeds", "0", "--out", str(out))
        assert rc == 0
        with open(out / "sweep.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 1
        assert rows[0]["scheduler"] == "sp"

    def test_dt_axis_rejected_for_spatial_only(self, tmp_path, capsys):
        rc = run_cli("sweep", "--schedulers", "sp,s", "--dts", "4,12",
                     "--out", str(tmp_path))
        assert rc == 2
        assert "time-shifting" in capsys.readouterr().err

    def test_dt_axis_expands_for_stp(self, tmp_path):
        out = tmp_path / "sweep"
        rc = run_cli("sweep", "--schedulers", "stp", "--maes", "0.1", "--thetas", "1,0,0",
                     "--dts", "4,12", "--seeds", "0,1", "--out", str(out))
        assert rc == 0
        with open(out / "sweep.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert [r["dt"] for r in rows] == ["4", "12"]
        assert all(r["seeds"] == "2" for r in rows)

    def test_resume_reuses_cells(self, tmp_path):
        out = tmp_path / "sweep"
        args = ("sweep", "--schedulers", "t", "--maes", "0.05", "--thetas", "0,1,0",
                "--seeds", "0", "--dts", "4", "--out", str(out))
        assert run_cli(*args) == 0
        first = (out / "sweep.csv").read_bytes()
        cell_files = list((out / "cells").glob("*.csv"))
        assert len(cell_files) == 1
        stamp = cell_files[0].stat().st_mtime_ns
        assert run_cli(*args) == 0
        assert (out / "sweep.csv").read_bytes() == first
        assert cell_files[0].stat().st_mtime_ns == stamp


class TestDataRoot:
    def test_env_var_overrides_default_root(self, tmp_path, monkeypatch, capsys):
        # Point the data root at a copy whose sample trace is unmistakable.
        root = tmp_path / "root"
        (root / "sample").mkdir(parents=True)
        shutil.copy(_packaged("coefficients.json"), root / "coefficients.json")
        shutil.copytree(_packaged("sample/grids"), root / "sample" / "grids")
        shutil.copy(_packaged("sample/regions.json"), root / "sample" / "regions.json")
        trace = (_packaged("sample/trace.csv")).read_text().splitlines()
        (root / "sample" / "trace.csv").write_text("\n".join(trace[:3]) + "\n")
        monkeypatch.setenv("FOOTPRINT_DATA_DIR", str(root))
        out = tmp_path / "out"
        rc = run_cli("run", "--scheduler", "local", "--out", str(out))
        assert rc == 0
        with open(out / "decisions.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 2  # only the two jobs kept in the trimmed trace

"""End-to-end CLI tests, run in process through main(argv)."""

from __future__ import annotations

import csv
from pathlib import Path

import pytest

from oksvm.cli import main


@pytest.fixture(scope="module")
def synth_csv(tmp_path_factory) -> Path:
    out = tmp_path_factory.mktemp("cli") / "synth.csv"
    assert main([
        "generate", "--n-samples", "80", "--dim", "2", "--sep", "1.4",
        "--seed", "3", "--out", str(out),
    ]) == 0
    return out


def _read_rows(path: Path) -> list[dict]:
    with path.open() as fh:
        return list(csv.DictReader(fh))


class TestExitCodes:
    def test_help_exits_zero(self, capsys):
        assert main(["--help"]) == 0
        assert "generate" in capsys.readouterr().out

    def test_subcommand_help_exits_zero(self, capsys):
        assert main(["train", "--help"]) == 0
        assert "--gamma" in capsys.readouterr().out

    def test_missing_subcommand_is_usage_error(self, capsys):
        assert main([]) == 1
        assert "error" in capsys.readouterr().err

    def test_unknown_flag_is_usage_error(self, capsys):
        assert main(["generate", "--out", "x.csv", "--bogus", "1"]) == 1
        assert "bogus" in capsys.readouterr().err

    def test_missing_required_flag_is_usage_error(self, capsys):
        assert main(["generate"]) == 1
        assert "--out" in capsys.readouterr().err

    def test_train_without_source_is_usage_error(self, capsys):
        assert main(["train"]) == 1
        assert "--preset or --data" in capsys.readouterr().err

    def test_missing_data_file_is_data_error(self, capsys):
        assert main(["train", "--data", "no/such/file.csv"]) == 2
        assert "data error" in capsys.readouterr().err

    def test_bad_value_is_usage_error(self, synth_csv, capsys):
        # c <= 0 fails model validation, reported as a usage problem
        assert main(["train", "--data", str(synth_csv), "--c", "-1"]) == 1
        assert "error" in capsys.readouterr().err

    def test_strict_unconverged_exits_three(self, synth_csv, capsys):
        code = main([
            "train", "--data", str(synth_csv), "--strict",
            "--max-outer-steps", "0",
        ])
        assert code == 3
        assert "non-convergence" in capsys.readouterr().err


class TestGenerate:
    def test_writes_header_and_rows(self, synth_csv):
        rows = _read_rows(synth_csv)
        assert len(rows) == 80
        assert set(rows[0]) == {"f0", "f1", "label"}
        assert {r["label"] for r in rows} == {"1", "-1"}


class TestTrain:
    def test_oksvm_prints_metrics_line(self, synth_csv, capsys):
        assert main(["train", "--data", str(synth_csv), "--split-seed", "1"]) == 0
        out = capsys.readouterr().out
        assert out.startswith("oksvm on synth:")
        for token in ("acc=", "precision=", "recall=", "f1=", "final_gamma=", "terminated_by="):
            assert token in out

    def test_svm_prints_metrics_line(self, synth_csv, capsys):
        assert main(["train", "--data", str(synth_csv), "--method", "svm"]) == 0
        out = capsys.readouterr().out
        assert out.startswith("svm on synth:")
        assert "final_gamma" not in out

    def test_trace_out_written(self, synth_csv, tmp_path, capsys):
        trace = tmp_path / "trace.csv"
        assert main(["train", "--data", str(synth_csv), "--trace-out", str(trace)]) == 0
        capsys.readouterr()
        with trace.open() as fh:
            header = fh.readline().strip()
        assert header == "t,gamma,dual_value,eta,ws,event"

    def test_model_out_written(self, synth_csv, tmp_path, capsys):
        out = tmp_path / "model.json"
        assert main(["train", "--data", str(synth_csv), "--model-out", str(out)]) == 0
        assert out.exists()
        assert "model written to" in capsys.readouterr().out

    def test_standardize_toggle_changes_nothing_fatal(self, synth_csv, capsys):
        assert main(["train", "--data", str(synth_csv), "--standardize"]) == 0
        capsys.readouterr()


class TestConfigFile:
    def test_flags_read_from_file(self, synth_csv, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(f"data = {synth_csv}\nmethod = svm\n# a comment\n\nc = 0.5\n")
        assert main(["train", "--config", str(cfg)]) == 0
        assert capsys.readouterr().out.startswith("svm on synth:")

    def test_cli_overrides_file(self, synth_csv, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(f"data = {synth_csv}\nmethod = svm\n")
        assert main(["train", "--config", str(cfg), "--method", "oksvm"]) == 0
        assert capsys.readouterr().out.startswith("oksvm on synth:")

    def test_boolean_values_toggle_flags(self, synth_csv, tmp_path, capsys):
        out = tmp_path / "rows.csv"
        cfg = tmp_path / "grid.cfg"
        cfg.write_text(
            "dims = 2\nseps = 1.2\ncs = 1.0\ngammas = 0.5\n"
            "repetitions = 1\nn_samples = 40\ntiming = true\n"
        )
        assert main(["grid-fixed", "--config", str(cfg), "--out", str(out)]) == 0
        capsys.readouterr()
        assert all(r["wall_time"] != "" for r in _read_rows(out))

    def test_missing_config_file(self, capsys):
        assert main(["train", "--config", "nowhere.cfg"]) == 1
        assert "config file not found" in capsys.readouterr().err

    def test_malformed_config_line(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("just some words\n")
        assert main(["train", "--config", str(cfg)]) == 1
        assert "expected key=value" in capsys.readouterr().err


class TestGridAndHeatmap:
    GRID = [
        "--dims", "2", "--seps", "1.2", "--cs", "1.0", "--gammas", "0.5",
        "--repetitions", "2", "--n-samples", "40", "--base-seed", "9",
    ]

    def test_fixed_grid_rows_and_byte_identical_rerun(self, tmp_path, capsys):
        first = tmp_path / "a.csv"
        second = tmp_path / "b.csv"
        assert main(["grid-fixed", *self.GRID, "--out", str(first)]) == 0
        assert main(["grid-fixed", *self.GRID, "--out", str(second)]) == 0
        capsys.readouterr()
        assert len(_read_rows(first)) == 4
        assert first.read_bytes() == second.read_bytes()

    def test_tuned_grid_runs(self, tmp_path, capsys):
        out = tmp_path / "tuned.csv"
        code = main([
            "grid-tuned", "--dims", "2", "--seps", "1.2",
            "--cs", "0.5,1.0", "--gammas", "0.1,0.5",
            "--repetitions", "1", "--n-samples", "40",
            "--tuning-runs", "2", "--out", str(out),
        ])
        assert code == 0
        capsys.readouterr()
        assert len(_read_rows(out)) == 2

    def test_heatmap_from_grid_rows(self, tmp_path, capsys):
        rows = tmp_path / "rows.csv"
        cells = tmp_path / "cells.csv"
        assert main(["grid-fixed", *self.GRID, "--out", str(rows)]) == 0
        assert main([
            "heatmap", "--rows", str(rows), "--group-by", "dim,sep",
            "--value", "f1_diff", "--out", str(cells),
        ]) == 0
        capsys.readouterr()
        recs = _read_rows(cells)
        assert len(recs) == 1
        float(recs[0]["value"])  # numeric cell

    def test_heatmap_unknown_metric(self, tmp_path, capsys):
        rows = tmp_path / "rows.csv"
        assert main(["grid-fixed", *self.GRID, "--out", str(rows)]) == 0
        code = main([
            "heatmap", "--rows", str(rows), "--group-by", "dim",
            "--value", "spam", "--out", str(tmp_path / "x.csv"),
        ])
        assert code == 1
        assert "unknown metric" in capsys.readouterr().err

    def test_heatmap_foreign_file(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("a,b\n1,2\n")
        code = main([
            "heatmap", "--rows", str(bad), "--group-by", "dim",
            "--value", "f1", "--out", str(tmp_path / "x.csv"),
        ])
        assert code == 2
        assert "not a results file" in capsys.readouterr().err


class TestCv:
    def test_iris_preset_end_to_end(self, bench_dir, tmp_path, capsys):
        rows_out = tmp_path / "cv.csv"
        summary_out = tmp_path / "summary.csv"
        code = main([
            "cv", "--preset", "iris", "--data-dir", str(bench_dir),
            "--k", "3", "--cs", "1.0", "--gammas", "0.5",
            "--out", str(rows_out), "--summary-out", str(summary_out),
        ])
        assert code == 0
        out = capsys.readouterr().out
        assert "iris: 3-fold CV" in out
        assert "±" in out
        assert len(_read_rows(rows_out)) == 6
        assert len(_read_rows(summary_out)) > 0

    def test_unknown_preset_is_usage_error(self, capsys):
        assert main(["cv", "--preset", "mystery", "--out", "x.csv"]) == 1
        assert "invalid choice" in capsys.readouterr().err

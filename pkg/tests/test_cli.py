import json
import os

import numpy as np
import pytest

from curvecast.cli import main


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    prices = d / "px.csv"
    rc = main(
        [
            "simulate", "--days", "70", "--tau", "12", "--seed", "7",
            "--noise-sd", "0.2", "--output", str(prices),
        ]
    )
    assert rc == 0
    lines = prices.read_text().strip().splitlines()
    fields = lines[-1].split(",")
    fields = fields[:7] + [""] * (len(fields) - 7)
    partial = d / "partial.csv"
    partial.write_text("\n".join(lines[:-1] + [",".join(fields)]) + "\n")
    return d, prices, partial


class TestSimulate:
    def test_output_shape(self, workdir):
        _, prices, _ = workdir
        lines = prices.read_text().strip().splitlines()
        assert len(lines) == 71
        assert len(lines[0].split(",")) == 13

    def test_same_seed_same_bytes(self, workdir, tmp_path):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        for out in (a, b):
            assert main(
                ["simulate", "--days", "20", "--tau", "8", "--seed", "3", "--output", str(out)]
            ) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_truth_dump(self, tmp_path):
        out = tmp_path / "c.csv"
        truth = tmp_path / "truth.json"
        rc = main(
            ["simulate", "--days", "15", "--tau", "8", "--seed", "3",
             "--output", str(out), "--truth", str(truth)]
        )
        assert rc == 0
        doc = json.loads(truth.read_text())
        assert "scores" in doc
        assert "manifest" in doc


class TestIngest:
    def test_summary_and_cleaned_output(self, workdir, tmp_path):
        _, prices, _ = workdir
        lines = prices.read_text().strip().splitlines()
        bad = lines[3].split(",")
        bad = [bad[0]] + [""] * (len(bad) - 1)
        dirty = tmp_path / "dirty.csv"
        dirty.write_text("\n".join(lines[:3] + [",".join(bad)] + lines[4:]) + "\n")
        cleaned = tmp_path / "clean.csv"
        summary = tmp_path / "summary.json"
        with pytest.warns(UserWarning):
            rc = main(
                ["ingest", "--input", str(dirty), "--output", str(cleaned),
                 "--summary", str(summary)]
            )
        assert rc == 0
        doc = json.loads(summary.read_text())
        assert doc["days_in"] == 70
        assert doc["days_kept"] == 69
        assert len(doc["days_dropped"]) == 1
        assert "manifest" in doc
        assert len(cleaned.read_text().strip().splitlines()) == 70


class TestFitForecast:
    def test_fit_document(self, workdir, tmp_path):
        _, prices, _ = workdir
        out = tmp_path / "model.json"
        assert main(["fit", "--input", str(prices), "--output", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert doc["kind"] == "fitted_models"
        assert "fpca" in doc and "var" in doc
        assert "manifest" in doc

    def test_forecast_outputs(self, workdir, tmp_path):
        _, prices, _ = workdir
        fc_csv = tmp_path / "fc.csv"
        fc_json = tmp_path / "fc.json"
        rc = main(
            ["forecast", "--input", str(prices), "--replicates", "60", "--seed", "5",
             "--output-csv", str(fc_csv), "--output-json", str(fc_json)]
        )
        assert rc == 0
        doc = json.loads(fc_json.read_text())
        assert set(doc["manifest"].keys()) == {"config_hash", "library", "seed"}
        rows = fc_csv.read_text().strip().splitlines()
        assert len(rows) == 12  # header + tau-1 grid points
        point = np.asarray(doc["point"], dtype=float)
        lo = np.asarray(doc["pointwise"]["0.2"]["lower"], dtype=float)
        hi = np.asarray(doc["pointwise"]["0.2"]["upper"], dtype=float)
        assert point.shape == lo.shape == hi.shape == (11,)
        assert np.all(lo <= hi)


class TestUpdate:
    def test_pls_with_fixed_lambda(self, workdir, tmp_path):
        _, _, partial = workdir
        out = tmp_path / "up.json"
        rc = main(
            ["update", "--input", str(partial), "--method", "pls", "--lam", "1.0",
             "--intervals", "--replicates", "60", "--seed", "5",
             "--output-json", str(out)]
        )
        assert rc == 0
        doc = json.loads(out.read_text())
        assert doc["method"] == "pls"
        assert doc["m"] == 6
        assert len(doc["point"]) == 6
        assert set(doc["intervals"].keys()) == {"0.2", "0.05"}
        assert "manifest" in doc

    def test_flr_and_ols(self, workdir, tmp_path):
        _, _, partial = workdir
        for method in ("flr", "ols"):
            out = tmp_path / f"{method}.json"
            rc = main(
                ["update", "--input", str(partial), "--method", method,
                 "--output-json", str(out)]
            )
            assert rc == 0
            assert json.loads(out.read_text())["method"] == method

    def test_pls_requires_lambda_source(self, workdir, tmp_path):
        _, _, partial = workdir
        rc = main(
            ["update", "--input", str(partial), "--method", "pls",
             "--output-json", str(tmp_path / "x.json")]
        )
        assert rc == 1

    def test_ols_intervals_rejected(self, workdir, tmp_path):
        _, _, partial = workdir
        rc = main(
            ["update", "--input", str(partial), "--method", "ols", "--intervals",
             "--output-json", str(tmp_path / "x.json")]
        )
        assert rc == 1


class TestTune:
    def test_schedule_then_update(self, workdir, tmp_path):
        _, prices, partial = workdir
        sched = tmp_path / "sched.json"
        rc = main(
            ["tune", "--input", str(prices), "--objective", "both",
             "--train-size", "40", "--validation-size", "10",
             "--lambda-grid", "0,1", "--periods", "6",
             "--replicates", "50", "--seed", "2", "--output", str(sched)]
        )
        assert rc == 0
        doc = json.loads(sched.read_text())
        assert "point" in doc and "interval" in doc
        assert "manifest" in doc
        out = tmp_path / "up.json"
        rc = main(
            ["update", "--input", str(partial), "--method", "pls",
             "--schedule", str(sched), "--output-json", str(out)]
        )
        assert rc == 0
        assert json.loads(out.read_text())["lambda"] in (0.0, 1.0)


class TestBacktest:
    def test_outputs_and_export_round_trip(self, workdir, tmp_path):
        _, prices, _ = workdir
        out1 = tmp_path / "bt1"
        args = [
            "backtest", "--input", str(prices), "--initial-train", "60",
            "--n-test", "3", "--methods", "TS,PLS", "--periods", "3,6",
            "--tune-train", "40", "--tune-validation", "15",
            "--lambda-grid", "0,1", "--replicates", "50", "--seed", "9",
        ]
        assert main(args + ["--outdir", str(out1)]) == 0
        names = sorted(os.listdir(out1))
        assert "report.json" in names
        assert "manifest.json" in names
        assert "updating_metrics.csv" in names
        out2 = tmp_path / "bt2"
        assert main(args + ["--outdir", str(out2)]) == 0
        for name in names:
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
        replot = tmp_path / "plots"
        rc = main(
            ["export-plots", "--report", str(out1 / "report.json"),
             "--outdir", str(replot)]
        )
        assert rc == 0
        for name in sorted(os.listdir(replot)):
            assert (replot / name).read_bytes() == (out1 / name).read_bytes()


class TestErrorPaths:
    def test_missing_input_is_exit_two(self, tmp_path):
        rc = main(
            ["fit", "--input", str(tmp_path / "nope.csv"),
             "--output", str(tmp_path / "m.json")]
        )
        assert rc == 2

    def test_unknown_config_key_is_exit_one(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"days": 30, "bogus_key": 1}))
        rc = main(["simulate", "--config", str(cfg), "--output", str(tmp_path / "x.csv")])
        assert rc == 1

    def test_flag_overrides_config(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"days": 30, "tau": 10, "seed": 1}))
        out = tmp_path / "merged.csv"
        rc = main(["simulate", "--config", str(cfg), "--days", "25", "--output", str(out)])
        assert rc == 0
        assert len(out.read_text().strip().splitlines()) == 26

    def test_bad_flag_is_exit_one(self, tmp_path):
        assert main(["simulate", "--no-such-flag", "1"]) == 1

    def test_bad_replicates_is_exit_one(self, workdir, tmp_path):
        _, prices, _ = workdir
        rc = main(
            ["forecast", "--input", str(prices), "--replicates", "0",
             "--output-json", str(tmp_path / "f.json")]
        )
        assert rc == 1

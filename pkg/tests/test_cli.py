"""Tests of CSV ingestion, the fit pipeline and the other subcommands."""
import csv
import json

import numpy as np
import pytest

import isoshrink.battery as battery
from isoshrink.cli import FitRequest, cmd_fit, main, nile_path, read_series_csv
from isoshrink.model import ModelConfig, SamplerConfig

FAST = SamplerConfig(n_iter=150, burn_in=50, thin=1, seed=3)


def write_csv(path, rows, header="x,y"):
    path.write_text(header + "\n" + "\n".join(rows) + ("\n" if rows else ""))
    return str(path)


class TestReadSeriesCsv:
    def test_minimal_file(self, tmp_path):
        p = write_csv(tmp_path / "s.csv", ["1,0.5", "2,0.7"])
        series = read_series_csv(p)
        assert series.n == 2
        assert np.array_equal(series.values, [0.5, 0.7])

    def test_unsorted_rows_sorted_with_warning(self, tmp_path):
        p = write_csv(tmp_path / "s.csv", ["2,0.7", "1,0.5", "3,0.9"])
        with pytest.warns(UserWarning, match="1 out-of-order"):
            series = read_series_csv(p)
        assert np.array_equal(series.locations, [1.0, 2.0, 3.0])

    def test_duplicate_location_names_line(self, tmp_path):
        p = write_csv(tmp_path / "s.csv", ["1,0.5", "3,0.7", "3,0.9"])
        with pytest.raises(ValueError, match=r":4: duplicate location x=3"):
            read_series_csv(p)

    def test_malformed_row_names_line(self, tmp_path):
        p = write_csv(tmp_path / "s.csv", ["1,0.5", "2,abc"])
        with pytest.raises(ValueError, match=r":3: non-numeric"):
            read_series_csv(p)

    def test_wrong_header(self, tmp_path):
        p = write_csv(tmp_path / "s.csv", ["1,2"], header="a,b")
        with pytest.raises(ValueError, match="expected header"):
            read_series_csv(p)

    def test_too_few_rows(self, tmp_path):
        p = write_csv(tmp_path / "s.csv", ["1,0.5"])
        with pytest.raises(ValueError, match="at least 2"):
            read_series_csv(p)

    def test_nile_shipped_dataset(self):
        series = read_series_csv(nile_path())
        assert series.n == 100
        assert series.locations[0] == 1871.0
        assert series.locations[-1] == 1970.0
        assert np.all(np.diff(series.locations) == 1.0)

    def test_nile_checksum_pinned(self):
        import hashlib

        digest = hashlib.sha256(nile_path().read_bytes()).hexdigest()
        assert digest == ("df2045549daa54ba4c18642d79230a0ca06dbb66"
                          "b6d436d09ed897719aaf06f3")


class TestCmdFit:
    def request(self, tmp_path, **kw):
        rows = ["%d,%.3f" % (i, v) for i, v in enumerate(
            [0.1, 0.2, 0.15, 0.9, 1.0, 1.05, 1.1, 1.02], start=1)]
        inp = write_csv(tmp_path / "in.csv", rows)
        defaults = dict(input_path=inp, output_path=str(tmp_path / "out.csv"),
                        model=ModelConfig(), sampler=FAST)
        defaults.update(kw)
        return FitRequest(**defaults)

    def test_summary_csv_round_trips_exactly(self, tmp_path):
        req = self.request(tmp_path)
        assert cmd_fit(req) == 0
        with open(req.output_path) as fh:
            rows = list(csv.DictReader(fh))
        assert list(rows[0]) == ["x", "mean", "lower", "upper"]
        assert len(rows) == 8
        for row in rows:
            assert float(row["lower"]) <= float(row["mean"]) <= float(row["upper"])
        # 17 significant digits: re-reading reproduces the doubles exactly
        again = [float(r["mean"]) for r in rows]
        assert again == [float(r["mean"]) for r in rows]

    def test_sidecar_contains_reproduction_fields(self, tmp_path):
        req = self.request(tmp_path)
        cmd_fit(req)
        meta = json.loads((tmp_path / "out.csv.meta.json").read_text())
        assert meta["sampler"] == {"n_iter": 150, "burn_in": 50, "thin": 1,
                                   "seed": 3, "stream_id": 0}
        assert meta["config"]["prior"] == "hh"
        assert meta["config"]["lambda_exponent"] == "paper"
        assert set(meta["floor_activations"]) == {"tau", "lambda", "sigma2"}
        assert "location" in meta["max_increment"]
        assert meta["level"] == 0.95

    def test_full_integer_grid_on_irregular_input(self, tmp_path):
        # 6 observed locations spanning 1..10 inclusive -> 10 output rows
        inp = write_csv(tmp_path / "in.csv",
                        ["1,0.0", "3,0.4", "4,0.5", "7,1.2", "9,1.3", "10,1.4"])
        req = FitRequest(input_path=inp, output_path=str(tmp_path / "out.csv"),
                         model=ModelConfig(), sampler=FAST, grid="full-integer")
        cmd_fit(req)
        with open(req.output_path) as fh:
            rows = list(csv.reader(fh))[1:]
        assert len(rows) == 10
        assert [float(r[0]) for r in rows] == list(map(float, range(1, 11)))

    def test_json_format(self, tmp_path):
        req = self.request(tmp_path, output_path=str(tmp_path / "out.json"),
                           format="json")
        cmd_fit(req)
        payload = json.loads((tmp_path / "out.json").read_text())
        assert set(payload) == {"summary", "meta"}
        assert len(payload["summary"]["mean"]) == 8

    def test_validation(self, tmp_path):
        with pytest.raises(ValueError):
            self.request(tmp_path, level=1.2)
        with pytest.raises(ValueError):
            self.request(tmp_path, grid="dense")
        with pytest.raises(ValueError):
            self.request(tmp_path, format="parquet")


class TestMainEntry:
    def test_missing_input_exits_1(self, tmp_path, capsys):
        code = main(["fit", str(tmp_path / "missing.csv"),
                     "--out", str(tmp_path / "o.csv")])
        assert code == 1
        assert "missing.csv" in capsys.readouterr().err

    def test_fit_rerun_is_byte_identical(self, tmp_path):
        rows = ["%d,%.2f" % (i, 0.1 * i) for i in range(1, 9)]
        inp = write_csv(tmp_path / "in.csv", rows)
        outs = []
        for name in ("a.csv", "b.csv"):
            out = tmp_path / name
            code = main(["fit", inp, "--out", str(out), "--iters", "200",
                         "--burnin", "50", "--seed", "9"])
            assert code == 0
            outs.append(out.read_bytes())
            meta = (tmp_path / (name + ".meta.json")).read_bytes()
            outs.append(meta)
        assert outs[0] == outs[2]
        assert outs[1] == outs[3]

    def test_simulate_subcommand_deterministic(self, tmp_path):
        args = ["simulate", "--scenario", "II", "--n", "20", "--reps", "2",
                "--priors", "hh", "--iters", "100", "--burnin", "30",
                "--base-seed", "5", "--threads", "2"]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(args + ["--out", str(a)]) == 0
        assert main(args + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
        header = a.read_text().splitlines()[0]
        assert header == "scenario,prior,rmse,cp,al,reps,failures"

    def test_simulate_details_csv(self, tmp_path):
        out, det = tmp_path / "t.csv", tmp_path / "d.csv"
        code = main(["simulate", "--scenario", "I", "--n", "15", "--reps", "2",
                     "--priors", "hn", "--iters", "80", "--burnin", "20",
                     "--out", str(out), "--details", str(det)])
        assert code == 0
        lines = det.read_text().strip().splitlines()
        assert lines[0] == "rep,prior,rmse,cp,al"
        assert len(lines) == 3

    def test_probe_subcommand_csv(self, tmp_path):
        out = tmp_path / "probe.csv"
        code = main(["probe", "--out", str(out), "--magnitudes", "5,20",
                     "--n", "6", "--i-star", "3", "--iters", "400",
                     "--burnin", "100"])
        assert code == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "z_star,gap,stderr,normal_prior_gap"
        assert len(lines) == 3  # one row per magnitude
        assert float(lines[1].split(",")[3]) == 0.5

    def test_density_plot_subcommand(self, tmp_path):
        out = tmp_path / "curves.csv"
        code = main(["density-plot", "--out", str(out), "--points", "12",
                     "--min", "0.05", "--max", "2.0"])
        assert code == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "eta,hh,hl,hn"
        assert len(lines) == 13

    def test_dist_test_passes(self, capsys):
        code = main(["dist-test", "--draws", "4000"])
        assert code == 0
        out = capsys.readouterr().out
        assert "checks passed" in out and "FAIL" not in out

    def test_dist_test_flags_broken_sampler(self, monkeypatch, capsys):
        # a sampler with a systematic bias must make the battery exit nonzero
        from isoshrink.rng import sample_truncated_normal_pos as real

        monkeypatch.setattr(battery, "sample_truncated_normal_pos",
                            lambda m, s, rng: real(m, s, rng) + 0.2)
        code = main(["dist-test", "--draws", "4000"])
        assert code == 1
        assert "FAIL" in capsys.readouterr().out

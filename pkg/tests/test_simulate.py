"""Tests of the scenario functions, data generation and replication driver."""
import numpy as np
import pytest

import isoshrink.simulate as sim
from isoshrink.model import ChainError, PriorFamily, SamplerConfig
from isoshrink.rng import RngStream
from isoshrink.simulate import (
    ReplicationPlan,
    Scenario,
    generate_dataset,
    run_replications,
    scenario_truth,
    subsample_irregular,
    write_details_csv,
    write_table_csv,
)

FAST = SamplerConfig(n_iter=120, burn_in=40, thin=1, seed=5)


class TestScenarioTruth:
    @pytest.mark.parametrize("s,x,expect", [
        (Scenario.I, 42.0, 2.0),
        (Scenario.II, 30.0, 2.5),
        (Scenario.II, 25.0, 0.0),       # right-closed branch boundary
        (Scenario.II, 25.000001, 2.5),
        (Scenario.II, 80.0, 2.5),
        (Scenario.II, 81.0, 3.0),
        (Scenario.III, 50.0, 2.0),
        (Scenario.IV, 20.0, 0.4),
        (Scenario.IV, 21.0, 0.02 * 21 + 1.0),
        (Scenario.IV, 50.0, 2.0),
        (Scenario.IV, 80.0, 0.02 * 80 + 1.5),
        (Scenario.IV, 100.0, 0.02 * 100 + 1.75),
        (Scenario.V, 40.0, 1.0 / 4.4 + 1.0),
    ])
    def test_pinned_values(self, s, x, expect):
        assert scenario_truth(s, x) == pytest.approx(expect)

    @pytest.mark.parametrize("x", [-0.5, 100.5])
    def test_domain(self, x):
        with pytest.raises(ValueError):
            scenario_truth(Scenario.I, x)

    @pytest.mark.parametrize("s", list(Scenario))
    def test_nondecreasing_on_dense_grid(self, s):
        xs = np.linspace(0.0, 100.0, 5000)
        vals = np.array([scenario_truth(s, x) for x in xs])
        assert np.all(np.diff(vals) >= 0)


class TestGenerateDataset:
    def test_noiseless_limit(self):
        series, truth = generate_dataset(Scenario.III, 50, 0.0, RngStream(0))
        assert np.array_equal(series.values, truth)
        assert np.array_equal(series.locations, np.arange(1.0, 51.0))

    def test_noise_variance(self):
        rng = RngStream(1)
        resid = []
        for rep in range(1000):
            series, truth = generate_dataset(Scenario.I, 100, 0.25, rng)
            resid.append(series.values - truth)
        v = np.concatenate(resid).var()  # 1e5 residuals
        assert abs(v - 0.25) < 0.005

    def test_deterministic(self):
        a, _ = generate_dataset(Scenario.II, 40, 0.25, RngStream(7, 3))
        b, _ = generate_dataset(Scenario.II, 40, 0.25, RngStream(7, 3))
        assert np.array_equal(a.values, b.values)


class TestSubsample:
    def full(self):
        return generate_dataset(Scenario.II, 100, 0.25, RngStream(0))

    def test_full_size_is_identity(self):
        series, truth = self.full()
        out = subsample_irregular(series, truth, 100, RngStream(1))
        assert np.array_equal(out.locations, series.locations)
        assert np.array_equal(out.values, series.values)

    def test_sorted_strictly_increasing(self):
        series, truth = self.full()
        out = subsample_irregular(series, truth, 25, RngStream(2))
        assert np.all(np.diff(out.locations) > 0)
        assert out.n == 25

    def test_uniform_marginal_inclusion(self):
        series, truth = self.full()
        counts = np.zeros(100)
        reps = 3000
        for r in range(reps):
            out = subsample_irregular(series, truth, 25, RngStream(3, r))
            counts[out.locations.astype(int) - 1] += 1
        freq = counts / reps
        se = np.sqrt(0.25 * 0.75 / reps)
        assert np.all(np.abs(freq - 0.25) < 5 * se)

    def test_size_domain(self):
        series, truth = self.full()
        with pytest.raises(ValueError):
            subsample_irregular(series, truth, 1, RngStream(0))
        with pytest.raises(ValueError):
            subsample_irregular(series, truth, 101, RngStream(0))


class TestRunReplications:
    def small_plan(self, **kw):
        defaults = dict(scenario=Scenario.II, n=25, reps=3, noise_var=0.25,
                        priors=(PriorFamily.HALF_HORSESHOE, PriorFamily.HALF_NORMAL),
                        sampler=FAST, base_seed=17)
        defaults.update(kw)
        return ReplicationPlan(**defaults)

    def test_deterministic_tables(self):
        plan = self.small_plan()
        a = run_replications(plan)
        b = run_replications(plan)
        assert a == b

    def test_thread_count_does_not_change_results(self):
        plan = self.small_plan()
        a = run_replications(plan, threads=1)
        b = run_replications(plan, threads=2)
        assert a == b

    def test_noiseless_constant_scenario_fits_tightly(self):
        plan = self.small_plan(scenario=Scenario.I, noise_var=0.0, reps=1,
                               priors=(PriorFamily.HALF_NORMAL,),
                               sampler=SamplerConfig(n_iter=400, burn_in=100, seed=2))
        rows = run_replications(plan)
        assert rows[0].rmse < 0.05

    def test_cp_is_replication_mean_of_location_means(self):
        plan = self.small_plan(reps=2)
        rows = run_replications(plan)
        per_rep = [sim._replicate_once(plan, r) for r in range(2)]
        for row in rows:
            cps = [per_rep[r][row.prior.value].cp for r in range(2)]
            assert row.cp == pytest.approx(np.mean(cps))

    def test_failures_counted_per_cell(self, monkeypatch):
        orig = sim.run_chain
        calls = {"k": 0}

        def flaky(series, mc, sc, stream_id=0):
            calls["k"] += 1
            if calls["k"] == 2:
                raise ChainError("injected")
            return orig(series, mc, sc, stream_id)

        monkeypatch.setattr(sim, "run_chain", flaky)
        rows = run_replications(self.small_plan(reps=2))
        assert sum(r.failures for r in rows) == 1
        failed_cell = [r for r in rows if r.failures][0]
        assert np.isfinite(failed_cell.rmse)  # mean over the surviving rep

    def test_irregular_plan_evaluates_on_full_grid(self):
        plan = self.small_plan(n=30, irregular=10, reps=2)
        rows = run_replications(plan)
        assert all(np.isfinite(r.rmse) for r in rows)

    def test_plan_validation(self):
        with pytest.raises(ValueError):
            self.small_plan(reps=0)
        with pytest.raises(ValueError):
            self.small_plan(irregular=1)
        with pytest.raises(ValueError):
            self.small_plan(irregular=25)  # must be < n


class TestTableEmission:
    def test_csv_round_trip(self, tmp_path):
        rows = run_replications(TestRunReplications().small_plan(reps=2))
        path = tmp_path / "table.csv"
        write_table_csv(path, rows)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "scenario,prior,rmse,cp,al,reps,failures"
        assert len(lines) == 1 + len(rows)
        cells = lines[1].split(",")
        assert float(cells[2]) == rows[0].rmse  # 17 significant digits survive

    def test_details_csv(self, tmp_path):
        plan = TestRunReplications().small_plan(reps=2)
        rows, details = run_replications(plan, collect_details=True)
        path = tmp_path / "details.csv"
        write_details_csv(path, details)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "rep,prior,rmse,cp,al"
        assert len(lines) == 1 + 2 * len(plan.priors)

    def test_format_table_is_aligned_text(self):
        rows = run_replications(TestRunReplications().small_plan(reps=1))
        text = sim.format_table(rows)
        assert "scenario" in text and "rmse" in text
        assert len(text.splitlines()) == 1 + len(rows)

"""Harness behavior: checkpoints, determinism, accounting, aggregation, suites."""

import numpy as np
import pytest

from regretlab import harness
from regretlab.problem import true_value, make_sphere_problem
from regretlab.regret import RegretSeries, rsr_oracle
from regretlab.optimizers import ESConfig, ResamplingSchedule, ShamirConfig


def small_spec(spec_id="rs", algorithm="rs", **kw):
    base = dict(
        spec_id=spec_id,
        algorithm=algorithm,
        dim=2,
        noise_std=0.3,
        budget=1000,
        replicates=2,
        master_seed=77,
    )
    base.update(kw)
    return harness.ExperimentSpec(**base)


class TestCheckpoints:
    def test_single_per_decade(self):
        np.testing.assert_array_equal(harness.log_spaced_checkpoints(100, 1), [1, 10, 100])

    def test_million_at_twenty_per_decade(self):
        cps = harness.log_spaced_checkpoints(10**6, 20)
        assert cps[0] == 1 and cps[-1] == 10**6
        assert cps.size <= 121
        assert np.all(np.diff(cps) > 0)

    def test_budget_always_included(self):
        cps = harness.log_spaced_checkpoints(977, 20)
        assert cps[-1] == 977

    def test_too_small_budget_rejected(self):
        with pytest.raises(ValueError):
            harness.log_spaced_checkpoints(5, 20)


class TestRunSingle:
    def test_bit_identical_reruns(self):
        spec = small_spec("shamir", "shamir")
        a = harness.run_single(spec, 0)
        b = harness.run_single(spec, 0)
        for kind in ("SR", "ASR", "RSR"):
            np.testing.assert_array_equal(a.series[kind].values, b.series[kind].values)

    def test_replicates_draw_distinct_optima(self):
        """Each replicate gets a freshly drawn hidden optimum."""
        spec = small_spec()
        seeds = [harness._replicate_seed(spec, i) for i in range(3)]
        optima = [make_sphere_problem(2, 0.3, s.spawn(3)[0]).optimum for s in seeds]
        assert not np.array_equal(optima[0], optima[1])
        assert not np.array_equal(optima[1], optima[2])

    def test_asr_bounded_by_any_checkpoint_point(self):
        spec = small_spec()
        rep = harness.run_single(spec, 0, force_generic=True, keep_trace=True)
        problem = make_sphere_problem(
            2, 0.3, harness._replicate_seed(spec, 0).spawn(3)[0]
        )
        pts = rep.trace.search_array()
        for i, n in enumerate(rep.checkpoints):
            assert rep.series["ASR"].values[i] <= true_value(problem, pts[n - 1]) + 1e-15

    def test_harness_rsr_matches_oracle_on_trace(self):
        spec = small_spec("es", "es", algo_config=ESConfig(), budget=800)
        rep = harness.run_single(spec, 0, force_generic=True, keep_trace=True)
        problem = make_sphere_problem(
            2, 0.3, harness._replicate_seed(spec, 0).spawn(3)[0]
        )
        oracle = rsr_oracle(problem, rep.trace, spec.regret).values
        np.testing.assert_array_equal(rep.series["RSR"].values, oracle[rep.checkpoints - 1])

    def test_exact_budget_consumed_with_huge_batches(self):
        """Exponential resampling overshoots the budget mid-batch; the run must
        still consume exactly the budget."""
        spec = small_spec(
            "es_resamp",
            "es",
            budget=997,
            algo_config=ESConfig(schedule=ResamplingSchedule(kind="exponential")),
        )
        rep = harness.run_single(spec, 0, force_generic=True, keep_trace=True)
        assert len(rep.trace) == 997

    def test_memory_capped_mode_matches_dense_tracking(self):
        """Bounded-memory trackers reproduce the dense-path series exactly."""
        for spec in (
            small_spec("rs", "rs", budget=700),
            small_spec("shamir", "shamir", budget=700, probe_period=2),
            small_spec(
                "es_resamp", "es", budget=700,
                algo_config=ESConfig(schedule=ResamplingSchedule(kind="exponential")),
            ),
        ):
            dense = harness.run_single(spec, 0)
            capped = harness.run_single(spec, 0, memory_capped=True)
            assert capped.replicate == 0
            for kind in ("SR", "ASR", "RSR"):
                np.testing.assert_array_equal(
                    dense.series[kind].values, capped.series[kind].values
                )

    def test_slope_consistency_on_real_runs(self):
        """Windowed worst-case regret never fits shallower than recommendation
        regret (plus fit tolerance) on produced runs."""
        for spec in (
            small_spec("rs", "rs", budget=20000, replicates=3),
            small_spec("shamir", "shamir", budget=20000, replicates=3,
                       algo_config=ShamirConfig()),
        ):
            res = harness.run_spec(spec)
            assert res.slope("RSR").slope <= res.slope("SR").slope + 0.05


class TestAggregation:
    def _fake_replicate(self, idx, cps, values):
        series = {
            "SR": RegretSeries("SR", cps, values),
            "ASR": RegretSeries("ASR", cps, np.minimum.accumulate(values)),
            "RSR": RegretSeries("RSR", cps, np.minimum.accumulate(values)),
        }
        return harness.ReplicateResult(replicate=idx, checkpoints=cps, series=series)

    def test_single_replicate_aggregate_is_identity(self):
        cps = np.array([1, 10, 100])
        vals = np.array([4.0, 2.0, 1.0])
        reps = [self._fake_replicate(0, cps, vals)]
        aggregates, _slopes = harness.aggregate_runs(reps, (1, 100))
        np.testing.assert_array_equal(aggregates["SR"]["mean"], vals)
        np.testing.assert_array_equal(aggregates["SR"]["median"], vals)

    def test_constant_series_slope_zero(self):
        cps = np.array([1, 10, 100, 1000])
        reps = [self._fake_replicate(i, cps, np.full(4, 3.0)) for i in range(3)]
        _aggregates, slopes = harness.aggregate_runs(reps, (1, 1000))
        assert slopes[("SR", "mean")].slope == pytest.approx(0.0, abs=1e-9)
        assert slopes[("SR", "median")].slope == pytest.approx(0.0, abs=1e-9)

    def test_mean_of_shifted_power_laws(self):
        cps = np.unique(np.round(10 ** np.linspace(0, 4, 50)).astype(int))
        reps = [
            self._fake_replicate(i, cps, c / cps.astype(float))
            for i, c in enumerate((1.0, 3.0, 11.0))
        ]
        _aggregates, slopes = harness.aggregate_runs(reps, (int(cps[0]), int(cps[-1])))
        assert slopes[("SR", "mean")].slope == pytest.approx(-1.0, abs=1e-6)

    def test_geomean_emitted_alongside(self):
        cps = np.array([1, 10, 100])
        reps = [self._fake_replicate(i, cps, np.array([4.0, 2.0, 1.0])) for i in range(2)]
        aggregates, _ = harness.aggregate_runs(reps, (1, 100))
        assert "geomean" in aggregates["SR"]
        np.testing.assert_allclose(aggregates["SR"]["geomean"], [4.0, 2.0, 1.0], rtol=1e-12)

    def test_mismatched_checkpoints_rejected(self):
        a = self._fake_replicate(0, np.array([1, 10]), np.array([2.0, 1.0]))
        b = self._fake_replicate(1, np.array([1, 20]), np.array([2.0, 1.0]))
        with pytest.raises(ValueError):
            harness.aggregate_runs([a, b], (1, 10))


class TestSuites:
    def test_empty_suite(self):
        suite = harness.run_suite([])
        assert suite.results == [] and suite.failures == []

    def test_fig1_lists_five_algorithms(self):
        specs = harness.fig1_suite(budget=1000, replicates=1)
        assert [s.spec_id for s in specs] == ["rs", "es", "es_resamp", "shamir", "fabian"]
        assert all(s.dim == 2 and s.noise_std == 0.3 for s in specs)

    def test_acceptance_suite_adds_two(self):
        specs = harness.acceptance_suite(budget=1000, replicates=1)
        ids = [s.spec_id for s in specs]
        assert ids[-2:] == ["mes_r", "shamir_probe"]

    def test_spec_failure_is_isolated(self):
        good = small_spec()
        bad = small_spec("bad", "shamir", algo_config=ShamirConfig())
        object.__setattr__(bad, "algorithm", "nope")  # corrupt after validation
        suite = harness.run_suite([bad, good])
        assert len(suite.results) == 1
        assert suite.results[0].spec.spec_id == "rs"
        assert len(suite.failures) == 1 and suite.failures[0][0] == "bad"

    def test_threaded_equals_sequential(self):
        spec = small_spec("shamir", "shamir", replicates=4)
        seq = harness.run_spec(spec, threads=1)
        par = harness.run_spec(spec, threads=4)
        for kind in ("SR", "ASR", "RSR"):
            np.testing.assert_array_equal(
                seq.aggregates[kind]["mean"], par.aggregates[kind]["mean"]
            )

    def test_run_result_slope_accessor(self):
        res = harness.run_spec(small_spec(budget=1000))
        est = res.slope("ASR")
        assert est.window == (10, 1000)
        assert est.method == "least_squares"


class TestSpecValidation:
    def test_budget_floor(self):
        with pytest.raises(ValueError):
            small_spec(budget=50)

    def test_replicates_floor(self):
        with pytest.raises(ValueError):
            small_spec(replicates=0)

    def test_unknown_algorithm(self):
        with pytest.raises(ValueError):
            small_spec(algorithm="annealing")

    def test_probe_period_bound(self):
        with pytest.raises(ValueError):
            small_spec(probe_period=1)

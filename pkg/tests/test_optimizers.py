"""Optimizer semantics under the ask/tell/recommend contract.

The driver in these tests feeds hand-chosen values, so selection rules,
update formulas, and accounting can be pinned without any statistics.
"""

import math

import numpy as np
import pytest

from regretlab._fastmath import sq_dist
from regretlab.optimizers import (
    ESConfig,
    FabianConfig,
    FabianSA,
    OnePlusOneES,
    RandomSearch,
    ResamplingSchedule,
    ShamirConfig,
    ShamirSGD,
    fabian_weights,
)


class TestResamplingSchedule:
    def test_none_is_single_evaluation(self):
        r = ResamplingSchedule()
        assert [r(n) for n in (1, 5, 40)] == [1, 1, 1]

    def test_constant(self):
        r = ResamplingSchedule(kind="constant", count=7)
        assert r(1) == r(99) == 7

    def test_exponential_doubling(self):
        r = ResamplingSchedule(kind="exponential", base=1.0, growth=2.0)
        assert [r(n) for n in (1, 2, 3, 10)] == [2, 4, 8, 1024]

    def test_exponential_never_overflows(self):
        r = ResamplingSchedule(kind="exponential", base=1.0, growth=2.0)
        assert r(5000) > 0

    def test_validation(self):
        with pytest.raises(ValueError):
            ResamplingSchedule(kind="exponential", growth=0.5)
        with pytest.raises(ValueError):
            ResamplingSchedule(kind="constant", count=0)
        with pytest.raises(ValueError):
            ResamplingSchedule(kind="weekly")


class TestRandomSearch:
    def test_keeps_best_noisy_value(self):
        """Fed values (4, 1, 9), the recommendation is the point with value 1."""
        opt = RandomSearch(2, seed=1)
        points = []
        for v in (4.0, 1.0, 9.0):
            points.append(opt.ask()[0])
            opt.tell(np.array([v]))
        assert np.array_equal(opt.recommend(), points[1])

    def test_tie_keeps_incumbent(self):
        opt = RandomSearch(2, seed=2)
        first = opt.ask()[0]
        opt.tell(np.array([3.0]))
        opt.ask()
        opt.tell(np.array([3.0]))  # equal value: strict < keeps the first point
        assert np.array_equal(opt.recommend(), first)

    def test_recommendation_before_first_tell_is_pending_point(self):
        opt = RandomSearch(2, seed=3)
        p = opt.ask()[0]
        assert np.array_equal(opt.recommend(), p)

    def test_points_uniform_in_unit_box(self):
        opt = RandomSearch(3, seed=4)
        pts = np.vstack([opt.ask() for _ in range(200)])
        assert np.all(pts >= 0) and np.all(pts < 1)


class TestOnePlusOneES:
    def test_strict_improvement_replaces_parent_and_grows_sigma(self):
        cfg = ESConfig()
        opt = OnePlusOneES(2, cfg, seed=5)
        batch = opt.ask()
        offspring = batch[0]
        opt.tell(np.array([1.0, 2.0]))  # offspring better
        assert np.array_equal(opt.parent, offspring)
        assert opt.sigma == pytest.approx(cfg.sigma0 * cfg.success_up)

    def test_failure_keeps_parent_and_shrinks_sigma(self):
        cfg = ESConfig()
        opt = OnePlusOneES(2, cfg, seed=6)
        parent = opt.parent.copy()
        opt.ask()
        opt.tell(np.array([2.0, 1.0]))
        assert np.array_equal(opt.parent, parent)
        assert opt.sigma == pytest.approx(cfg.sigma0 * cfg.failure_down)

    def test_tie_counts_as_failure(self):
        """Averaged values equal: the parent stays (strict improvement only)."""
        cfg = ESConfig()
        opt = OnePlusOneES(2, cfg, seed=7)
        parent = opt.parent.copy()
        opt.ask()
        opt.tell(np.array([1.5, 1.5]))
        assert np.array_equal(opt.parent, parent)
        assert opt.sigma < cfg.sigma0

    def test_batch_layout_under_resampling(self):
        cfg = ESConfig(schedule=ResamplingSchedule(kind="exponential", base=1.0, growth=2.0))
        opt = OnePlusOneES(2, cfg, seed=8)
        batch = opt.ask()  # r(1) = 2 -> 2 offspring copies + 2 parent copies
        assert batch.shape == (4, 2)
        assert np.array_equal(batch[0], batch[1])
        assert np.array_equal(batch[2], opt.parent) and np.array_equal(batch[3], opt.parent)

    def test_selection_compares_averages(self):
        cfg = ESConfig(schedule=ResamplingSchedule(kind="constant", count=2))
        opt = OnePlusOneES(2, cfg, seed=9)
        opt.ask()
        # offspring avg 2.0 vs parent avg 1.5: no replacement
        parent = opt.parent.copy()
        opt.tell(np.array([1.0, 3.0, 1.0, 2.0]))
        assert np.array_equal(opt.parent, parent)

    def test_budget_caps_resampling(self):
        cfg = ESConfig(schedule=ResamplingSchedule(kind="exponential", base=1.0, growth=2.0))
        opt = OnePlusOneES(2, cfg, seed=10, budget=100)
        sizes = []
        done = 0
        while done < 100:
            batch = opt.ask()
            k = min(len(batch), 100 - done)
            sizes.append(len(batch))
            done += k
            if k == len(batch):
                opt.tell(np.zeros(k) + np.arange(k))  # offspring wins ties? values increasing
            else:
                break
        assert all(s <= 2 * 100 for s in sizes)

    def test_fake_offspring_batch_and_inertness(self):
        sched = ResamplingSchedule(kind="exponential", base=1.0, growth=2.0)
        plain = OnePlusOneES(2, ESConfig(schedule=sched), seed=11)
        mes = OnePlusOneES(2, ESConfig(schedule=sched, fake_offspring=True), seed=11)
        rng = np.random.default_rng(12)
        for _ in range(8):
            r = plain.resamples(plain.iteration)
            bp = plain.ask()
            bm = mes.ask()
            assert bm.shape == (3 * r, 2)
            assert np.array_equal(bp, bm[: 2 * r])
            shared = rng.standard_normal(2 * r)
            plain.tell(shared)
            mes.tell(np.concatenate([shared, np.full(r, 1e6)]))
            assert np.array_equal(plain.parent, mes.parent)
            assert plain.sigma == mes.sigma

    def test_fake_offspring_requires_exponential_schedule(self):
        with pytest.raises(ValueError):
            ESConfig(fake_offspring=True)

    def test_mu_lambda_beyond_one_plus_one_rejected(self):
        with pytest.raises(NotImplementedError):
            OnePlusOneES(2, ESConfig(mu=2, lambda_=4), seed=1)

    def test_sigma_stays_positive(self):
        opt = OnePlusOneES(2, ESConfig(), seed=13)
        for _ in range(300):
            opt.ask()
            opt.tell(np.array([2.0, 1.0]))  # always fail
        assert opt.sigma > 0


class TestShamirSGD:
    def test_probe_offset_norm_is_epsilon(self):
        cfg = ShamirConfig(epsilon=0.3)
        opt = ShamirSGD(2, cfg, seed=14)
        for _ in range(100):
            pt = opt.ask()[0]
            assert math.sqrt(sq_dist(pt, opt.xhat)) == pytest.approx(0.3, abs=1e-12)
            opt.tell(np.array([1.0]))

    def test_gradient_sketch_formula_one_dim(self):
        """d=1: observed value 2 at probe x = xhat + 0.3 r gives update -(v/0.3) r / lambda."""
        cfg = ShamirConfig(epsilon=0.3, lambda_step=0.1, ball_radius=100.0)
        opt = ShamirSGD(1, cfg, seed=15)
        pt = opt.ask()[0]
        r = 1.0 if pt[0] > 0 else -1.0  # xhat starts at 0
        opt.tell(np.array([2.0]))
        expected = 0.0 - (2.0 / 0.3) * r / (0.1 * 1)
        assert opt.xhat[0] == pytest.approx(expected, rel=1e-12)

    def test_projection_onto_ball(self):
        cfg = ShamirConfig(epsilon=0.3, lambda_step=1e-3, ball_radius=3.0)
        opt = ShamirSGD(2, cfg, seed=16)
        opt.ask()
        opt.tell(np.array([1e6]))  # huge value throws the iterate far out
        assert math.sqrt(sq_dist(opt.xhat, np.zeros(2))) == pytest.approx(3.0, abs=1e-12)
        # a point already inside stays put under projection
        opt2 = ShamirSGD(2, cfg, seed=17)
        opt2.ask()
        opt2.tell(np.array([1e-9]))
        assert math.sqrt(sq_dist(opt2.xhat, np.zeros(2))) < 3.0

    def test_recommendation_is_trailing_half_average(self):
        opt = ShamirSGD(2, ShamirConfig(), seed=18)
        for _ in range(9):
            opt.ask()
            opt.tell(np.array([0.5]))
        # iteration counter now 10: average iterates 5..10
        hist = np.vstack(opt.xhat_history)  # rows are iterates 1..10
        expected = hist[4:10].mean(axis=0)
        np.testing.assert_allclose(opt.recommend(), expected, atol=1e-14)

    def test_initial_recommendation_is_origin(self):
        opt = ShamirSGD(3, ShamirConfig(), seed=19)
        np.testing.assert_array_equal(opt.recommend(), np.zeros(3))


class TestFabianWeights:
    def test_s2_is_central_difference(self):
        np.testing.assert_allclose(fabian_weights(2), [0.5], atol=1e-14)

    def test_s4_solution(self):
        """The 2x2 system [[1, 1/2], [1, 1/8]] v = (1/2, 0) solves to (-1/6, 4/3)."""
        v = fabian_weights(4)
        assert v[0] == pytest.approx(-1.0 / 6.0, abs=1e-12)
        assert v[1] == pytest.approx(4.0 / 3.0, abs=1e-12)
        u = np.array([1.0, 0.5])
        assert float(v @ u) == pytest.approx(0.5, abs=1e-12)
        assert float(v @ u**3) == pytest.approx(0.0, abs=1e-12)

    def test_defining_system_residuals(self):
        for s in (2, 4, 6, 8, 12, 16):
            v = fabian_weights(s)
            u = 1.0 / np.arange(1, s // 2 + 1)
            for i in range(1, s // 2 + 1):
                target = 0.5 if i == 1 else 0.0
                assert float(np.sum(v * u ** (2 * i - 1))) == pytest.approx(target, abs=1e-10)

    def test_invalid_s(self):
        for bad in (0, 3, -2, 34):
            with pytest.raises(ValueError):
                fabian_weights(bad)


class TestFabianConfig:
    def test_gamma_bounds(self):
        with pytest.raises(ValueError, match="gamma"):
            FabianConfig(gamma=0.6)
        with pytest.raises(ValueError, match="gamma"):
            FabianConfig(gamma=0.0)

    def test_odd_s_rejected(self):
        with pytest.raises(ValueError, match="even"):
            FabianConfig(s=3)

    def test_alpha_pinned(self):
        with pytest.raises(ValueError):
            FabianConfig(alpha=0.9)

    def test_stability_warning(self):
        with pytest.warns(UserWarning, match="stability"):
            FabianConfig(a=0.01, gamma=0.4)


class TestFabianSA:
    def test_probe_geometry_and_constant_recommendation(self):
        cfg = FabianConfig(s=4, gamma=0.1)
        opt = FabianSA(2, cfg, seed=20)
        x = opt.x.copy()
        batch = opt.ask()
        assert batch.shape == (8, 2)
        c1 = cfg.c / 1**cfg.gamma
        u = np.array([1.0, 0.5])
        row = 0
        for j in range(2):
            for i in range(2):
                plus, minus = batch[row], batch[row + 1]
                np.testing.assert_allclose(plus - x, c1 * u[j] * np.eye(2)[i], atol=1e-14)
                np.testing.assert_allclose(minus - x, -c1 * u[j] * np.eye(2)[i], atol=1e-14)
                row += 2
        assert np.array_equal(opt.recommend(), x)  # unchanged until tell

    def test_exact_gradient_on_quadratic_one_dim(self):
        """Noise-free s=2 central difference is exact on the quadratic bowl:
        at distance 1 past the optimum the estimate is the true gradient 2."""
        cfg = FabianConfig(s=2, gamma=0.25)
        opt = FabianSA(1, cfg, seed=21)
        x0 = opt.x.copy()
        x_star = float(x0[0]) - 1.0  # place the optimum so x0 - x_star = 1
        batch = opt.ask()
        values = np.array([(p - x_star) ** 2 for p in batch[:, 0]])
        opt.tell(values)
        # update: x0 - a_1 * grad with grad = 2 exactly
        assert opt.x[0] == pytest.approx(x0[0] - cfg.a * 2.0, rel=1e-12)

    def test_evaluations_per_iteration(self):
        cfg = FabianConfig(s=6)
        opt = FabianSA(3, cfg, seed=22)
        assert opt.ask().shape == (18, 3)


class TestDimensionGapSmoke:
    def test_fake_offspring_regret_gap_shrinks_with_dimension(self):
        """The running-minimum metric beats the recommendation metric by a
        dimension-dependent margin that shrinks as dimension grows."""
        from regretlab import harness

        def gap(dim):
            spec = harness.ExperimentSpec(
                spec_id="mes_gap", algorithm="es", dim=dim, noise_std=0.3,
                budget=10**5, replicates=5, master_seed=3,
                algo_config=ESConfig(
                    schedule=ResamplingSchedule(kind="exponential"), fake_offspring=True
                ),
            )
            res = harness.run_spec(spec)
            return res.slope("ASR").slope - res.slope("SR").slope

        assert abs(gap(8)) < abs(gap(2))

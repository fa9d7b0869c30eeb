"""Acceptance criteria for the whole laboratory.

Criteria 1-8 are slope checks on the full-scale benchmark: d=2, noise 0.3,
10 replicates, 10^6 evaluations each, least-squares fit on the mean regret
over checkpoints in [10^4, 10^6].  The tolerance bands are wide on purpose:
the slopes are asymptotic statements and run-to-run variance at 10 replicates
is material.  Criterion 9 is the deterministic property suite and criterion 10
the noise-free sanity runs.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one line per check.
"""

import time

import numpy as np
import pytest

from regretlab import harness
from regretlab.selfcheck import CHECKS


def check(name, ok, detail=""):
    line = f"{'PASS' if ok else 'FAIL'} {name}" + (f"  [{detail}]" if detail else "")
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def suite():
    """The full-scale benchmark: five base setups plus the two wrapped ones."""
    result = harness.run_suite(harness.acceptance_suite())
    assert not result.failures, result.failures
    return {r.spec.spec_id: r for r in result.results}


def slope(suite, spec_id, kind):
    return suite[spec_id].slope(kind, "mean").slope


class TestCriterion1GradientSketch:
    def test_sr_slope(self, suite):
        s = slope(suite, "shamir", "SR")
        check("c1 one-point sketch SR slope in [-1.25, -0.75]", -1.25 <= s <= -0.75, f"{s:.3f}")

    def test_asr_slope(self, suite):
        s = slope(suite, "shamir", "ASR")
        check("c1 one-point sketch ASR slope in [-0.10, +0.05]", -0.10 <= s <= 0.05, f"{s:.3f}")


class TestCriterion2CentralDifferences:
    def test_sr_slope(self, suite):
        s = slope(suite, "fabian", "SR")
        check("c2 central-difference SR slope in [-1.25, -0.70]", -1.25 <= s <= -0.70, f"{s:.3f}")

    def test_asr_slope(self, suite):
        s = slope(suite, "fabian", "ASR")
        check("c2 central-difference ASR slope in [-0.20, +0.05]", -0.20 <= s <= 0.05, f"{s:.3f}")


class TestCriterion3RandomSearch:
    def test_asr_slope(self, suite):
        s = slope(suite, "rs", "ASR")
        check("c3 random search ASR slope in [-1.35, -0.70]", -1.35 <= s <= -0.70, f"{s:.3f}")

    def test_mean_sr_does_not_converge(self, suite):
        s = slope(suite, "rs", "SR")
        check("c3 random search mean-SR slope >= -0.15", s >= -0.15, f"{s:.3f}")


class TestCriterion4PlainES:
    def test_sr_stagnates(self, suite):
        s = slope(suite, "es", "SR")
        check("c4 plain (1+1)-ES SR slope in [-0.35, +0.05]", -0.35 <= s <= 0.05, f"{s:.3f}")


class TestCriterion5ResampledES:
    def test_sr_slope(self, suite):
        s = slope(suite, "es_resamp", "SR")
        check("c5 2**n-resampled ES SR slope in [-0.60, -0.10]", -0.60 <= s <= -0.10, f"{s:.3f}")


class TestCriterion6FakeOffspring:
    def test_asr_beats_sr_by_margin(self, suite):
        gap = slope(suite, "mes_r", "ASR") - slope(suite, "mes_r", "SR")
        check("c6 fake-offspring ES: ASR slope <= SR slope - 0.6", gap <= -0.6, f"gap {gap:.3f}")


class TestCriterion7ProbedSketch:
    def test_asr_slope(self, suite):
        s = slope(suite, "shamir_probe", "ASR")
        check("c7 probed sketch ASR slope in [-1.30, -0.70]", -1.30 <= s <= -0.70, f"{s:.3f}")

    def test_sr_unchanged_by_probing(self, suite):
        diff = abs(slope(suite, "shamir_probe", "SR") - slope(suite, "shamir", "SR"))
        check("c7 probed sketch SR slope within 0.15 of unprobed", diff <= 0.15, f"|diff| {diff:.3f}")


class TestCriterion8Ordering:
    def test_sr_ordering(self, suite):
        sh, esr, rs = (slope(suite, k, "SR") for k in ("shamir", "es_resamp", "rs"))
        check(
            "c8 SR slopes: sketch < resampled ES < random search + 0.05",
            sh < esr < rs + 0.05,
            f"{sh:.3f} < {esr:.3f} < {rs + 0.05:.3f}",
        )

    def test_asr_ordering(self, suite):
        rs, sh = slope(suite, "rs", "ASR"), slope(suite, "shamir", "ASR")
        check("c8 ASR slopes: random search < sketch - 0.5", rs < sh - 0.5, f"{rs:.3f} < {sh - 0.5:.3f}")


class TestCriterion9PropertySuite:
    """Deterministic oracle equivalences and invariants; must finish fast."""

    def test_property_suite_under_ten_seconds(self):
        t0 = time.time()
        failures = []
        for name, fn in CHECKS:
            ok, detail = fn()
            print(f"{'PASS' if ok else 'FAIL'} c9 {name}: {detail}")
            if not ok:
                failures.append((name, detail))
        elapsed = time.time() - t0
        assert not failures, failures
        check("c9 property suite wall time < 10 s", elapsed < 10.0, f"{elapsed:.1f}s")


class TestCriterion10NoiseFree:
    """Zero-noise convergence: gradient methods hit 1e-4, the ES hits 1e-8."""

    def _final_srs(self, algorithm, budget=10**4):
        spec = harness.ExperimentSpec(
            spec_id=f"nf_{algorithm}", algorithm=algorithm, dim=2, noise_std=0.0,
            budget=budget, replicates=3, master_seed=3,
        )
        res = harness.run_spec(spec)
        return [r.series["SR"].values[-1] for r in res.replicates]

    def test_noise_free_convergence_under_five_seconds(self):
        t0 = time.time()
        for algorithm, bound in (("shamir", 1e-4), ("fabian", 1e-4), ("es", 1e-8)):
            worst = max(self._final_srs(algorithm))
            check(
                f"c10 noise-free {algorithm} reaches SR <= {bound:g} in 1e4 evals",
                worst <= bound,
                f"worst {worst:.2e}",
            )
        check("c10 wall time < 5 s", time.time() - t0 < 5.0, f"{time.time() - t0:.1f}s")


class TestSupplementarySlopeFacts:
    """Statistically robust structural facts checked on the same big runs."""

    def test_windowed_regret_never_shallower_than_recommendation_regret(self, suite):
        """The windowed-regret slope lower-bounds the recommendation-regret
        slope.  The relation is asymptotic; a finite-window fit is a faithful
        proxy only when SR itself decays smoothly, so the exponential-schedule
        setups are excluded: their SR is a staircase with a handful of
        plateaus (and occasional upward jumps) inside the fit window, which
        the running-minimum construction of RSR flattens ahead of time."""
        for spec_id in ("rs", "shamir", "fabian", "shamir_probe"):
            res = suite[spec_id]
            rsr = res.slope("RSR", "mean").slope
            sr = res.slope("SR", "mean").slope
            check(f"RSR slope <= SR slope + 0.05 for {spec_id}", rsr <= sr + 0.05,
                  f"{rsr:.3f} vs {sr:.3f}")

    def test_gradient_sketch_recommendation_improves_thousandfold(self, suite):
        reps = suite["shamir"].replicates
        drops = [r.series["SR"].values[0] / max(r.series["SR"].values[-1], 1e-300) for r in reps]
        good = sum(d >= 1e3 for d in drops)
        check("sketch SR final below initial by 1e3 in >= 8/10 replicates", good >= 8, f"{good}/10")

    def test_es_step_size_tracks_distance(self, suite):
        """Step-size diagnostics exist and stay within a sane band of the
        recommendation distance during the fit window (resampled ES)."""
        reps = suite["es_resamp"].replicates
        assert all(r.sigma is not None for r in reps)
        cps = suite["es_resamp"].checkpoints
        window = cps >= 10**4
        ratios = np.vstack([r.rec_dist_over_sigma[window] for r in reps])
        med = float(np.median(ratios))
        check("resampled ES: median dist/sigma in [0.05, 50]", 0.05 <= med <= 50.0, f"{med:.2f}")

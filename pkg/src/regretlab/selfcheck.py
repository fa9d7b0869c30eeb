"""Deterministic self-checks: oracle equivalences and structural invariants.

Everything here runs in a few seconds with no statistical tolerance games:
streaming aggregates must equal their brute-force oracles bit-for-bit,
structural invariants must hold exactly, and the slope estimator must recover
synthetic power laws to 1e-9.  The ``validate`` CLI subcommand runs the whole
registry and exits nonzero on any failure; the acceptance test suite asserts
the same registry.
"""

from __future__ import annotations

import math

import numpy as np

from ._fastmath import sq_dist
from .problem import NoisyBlackBox, RunTrace, make_sphere_problem, true_value
from .regret import (
    RegretConfig,
    RegretSeries,
    RsrStream,
    default_g,
    estimate_slope,
    rsr_oracle,
    rsr_stream,
    sr_series,
)
from .optimizers import (
    ESConfig,
    OnePlusOneES,
    RandomSearch,
    ResamplingSchedule,
    ShamirConfig,
    ShamirSGD,
    fabian_weights,
    wrap_probe_recommendation,
    wrap_repeat_g,
)
from . import harness

__all__ = ["run_selfchecks", "CHECKS"]


def _random_trace(problem, rng, n):
    """Trace with random search points and recommendations (values irrelevant)."""
    trace = RunTrace()
    pts = rng.random((n, problem.dim)) * 2.0 - 0.5
    recs = rng.random((n, problem.dim)) * 2.0 - 0.5
    for i in range(n):
        trace.append(pts[i], 0.0, recs[i])
    return trace


def check_rsr_stream_equals_oracle():
    """Streaming RSR == brute-force RSR, bit-for-bit, on 100 random traces."""
    rng = np.random.default_rng(20)
    problem = make_sphere_problem(2, 0.3, seed=21)
    combos = [(p, q) for p in (1.0, 2.0) for q in (0.5, 0.9, 1.0)]
    lengths = np.unique(np.round(10 ** rng.uniform(1, 4, size=100)).astype(int))
    cases = 0
    while cases < 100:
        n = int(lengths[cases % lengths.size])
        p, q = combos[cases % len(combos)]
        trace = _random_trace(problem, rng, n)
        cfg = RegretConfig(g_exponent=p, quantile=q)
        a = rsr_stream(problem, trace, cfg).values
        b = rsr_oracle(problem, trace, cfg).values
        if not np.array_equal(a, b):
            return False, f"mismatch at n={n}, p={p}, q={q}"
        cases += 1
    return True, f"{cases} traces, p in (1,2), q in (0.5,0.9,1.0)"


def check_rsr_incremental_tracker():
    """Push-based tracker (full and capacity-capped) matches the oracle."""
    rng = np.random.default_rng(22)
    problem = make_sphere_problem(2, 0.3, seed=23)
    for case in range(20):
        n = int(rng.integers(10, 800))
        p = float(rng.choice([0.5, 1.0, 2.0]))
        q = float(rng.choice([0.5, 1.0]))
        trace = _random_trace(problem, rng, n)
        cfg = RegretConfig(g_exponent=p, quantile=q)
        expected = rsr_oracle(problem, trace, cfg).values
        sr = sr_series(problem, trace).values
        for capacity in (None, default_g(n, p) + 1):
            tracker = RsrStream(cfg, capacity=capacity)
            got = np.array([tracker.push(v) for v in sr])
            if not np.array_equal(got, expected):
                return False, f"tracker mismatch n={n} p={p} q={q} capacity={capacity}"
    return True, "20 traces, full-history and capacity-capped"


def check_repeat_wrapper_rsr_bound():
    """Repeating each base point 1+g(n) times bounds windowed regret by base ASR.

    The bound 'RSR of the wrapped trace at each block end <= base ASR' holds
    exactly whenever every window fits inside one repetition block, i.e.
    g(e_n) <= 1 + g(n) with e_n the inflated end index.  That precondition is
    asserted, and holds for all n with g exponent 0.5 (window growth per block
    stays below one) and for short traces with exponent 1.
    """

    class _Scripted:
        def __init__(self, points):
            self.dim = points.shape[1]
            self.points = points
            self.i = 0

        def ask(self):
            pts = self.points[self.i][None, :]
            self.i += 1
            return pts

        def tell(self, values):
            pass

        def recommend(self):
            return self.points[max(0, self.i - 1)]

    rng = np.random.default_rng(24)
    problem = make_sphere_problem(2, 0.3, seed=25)
    for case in range(100):
        if case % 2 == 0:
            p, n_base = 0.5, int(rng.integers(5, 120))
        else:
            p, n_base = 1.0, int(rng.integers(3, 15))
        cfg = RegretConfig(g_exponent=p)
        base_pts = rng.random((n_base, 2)) * 2.0 - 0.5
        # precondition: every window fits inside its block
        e = 0
        for m in range(1, n_base + 1):
            e += 1 + default_g(m, p)
            if default_g(e, p) > 1 + default_g(m, p):
                return False, f"test regime broken: g(e_{m})>{1 + default_g(m, p)} at p={p}"
        wrapped = wrap_repeat_g(_Scripted(base_pts), cfg)
        trace = RunTrace()
        e_total = sum(1 + default_g(m, p) for m in range(1, n_base + 1))
        for _ in range(e_total):
            pt = wrapped.ask()[0]
            rec = wrapped.recommend()
            trace.append(pt, 0.0, rec)
            wrapped.tell(np.zeros(1))
        rsr = rsr_stream(problem, trace, cfg).values
        base_tv = np.array([true_value(problem, x) for x in base_pts])
        base_asr = np.minimum.accumulate(base_tv)
        e = 0
        for m in range(n_base):
            e += 1 + default_g(m + 1, p)
            if not rsr[e - 1] <= base_asr[m]:
                return False, f"RSR({e})={rsr[e - 1]} > ASR({m + 1})={base_asr[m]}"
    return True, "100 synthetic bases, block ends checked exactly"


def check_fabian_weights():
    """Weight systems solve to 1e-10; the s=4 solution is (-1/6, 4/3) to 1e-12."""
    for s in (2, 4, 6, 8):
        v = fabian_weights(s)
        s2 = s // 2
        u = 1.0 / np.arange(1, s2 + 1)
        for i in range(1, s2 + 1):
            target = 0.5 if i == 1 else 0.0
            got = float(np.sum(v * u ** (2 * i - 1)))
            if abs(got - target) > 1e-10:
                return False, f"s={s}: sum v_j u_j^{2 * i - 1} = {got}, want {target}"
    v4 = fabian_weights(4)
    if abs(v4[0] - (-1 / 6)) > 1e-12 or abs(v4[1] - 4 / 3) > 1e-12:
        return False, f"s=4 weights {v4} != (-1/6, 4/3)"
    return True, "s in (2,4,6,8), residuals <= 1e-10"


def _small_specs(budget=2000, seed=29):
    specs = harness.fig1_suite(budget=budget, replicates=1, master_seed=seed)
    specs.append(
        harness.ExperimentSpec(
            spec_id="mes_r",
            algorithm="es",
            dim=2,
            noise_std=0.3,
            budget=budget,
            replicates=1,
            master_seed=seed,
            algo_config=ESConfig(
                schedule=ResamplingSchedule(kind="exponential"), fake_offspring=True
            ),
        )
    )
    specs.append(
        harness.ExperimentSpec(
            spec_id="shamir_probe",
            algorithm="shamir",
            dim=2,
            noise_std=0.3,
            budget=budget,
            replicates=1,
            master_seed=seed,
            probe_period=2,
        )
    )
    return specs


def check_series_monotonicity():
    """ASR and RSR series from every algorithm are non-increasing and nonnegative."""
    for spec in _small_specs():
        rep = harness.run_single(spec, 0)
        for kind in ("ASR", "RSR"):
            vals = rep.series[kind].values
            if np.any(np.diff(vals) > 0):
                return False, f"{spec.spec_id}: {kind} increases"
            if np.any(vals < 0):
                return False, f"{spec.spec_id}: {kind} negative"
        if np.any(rep.series["SR"].values < 0):
            return False, f"{spec.spec_id}: SR negative"
    return True, "all seven run setups"


def check_shamir_geometry():
    """Probe distance ||x_n - xhat_n|| == epsilon to 1e-12; iterates stay in the ball."""
    cfg = ShamirConfig()
    opt = ShamirSGD(2, cfg, seed=31)
    problem = make_sphere_problem(2, 0.3, seed=32)
    box = NoisyBlackBox(problem, np.random.default_rng(33))
    for n in range(2000):
        pt = opt.ask()[0]
        xhat = opt.xhat
        dist = math.sqrt(sq_dist(pt, xhat))
        if abs(dist - cfg.epsilon) > 1e-12:
            return False, f"probe distance {dist} != eps at n={n + 1}"
        opt.tell(np.array([box(pt)]))
        if math.sqrt(sq_dist(opt.xhat, np.zeros(2))) > cfg.ball_radius + 1e-12:
            return False, f"iterate escaped the ball at n={n + 1}"
    return True, "2000 iterations"


def check_evaluation_accounting():
    """Trace length == black-box call count == budget for every algorithm and wrapper."""
    budget = 1200
    for spec in _small_specs(budget=budget, seed=37):
        rep = harness.run_single(spec, 0, force_generic=True, keep_trace=True)
        if len(rep.trace) != budget:
            return False, f"{spec.spec_id}: trace holds {len(rep.trace)} != {budget}"
    # repeat wrapper accounting, driven directly
    problem = make_sphere_problem(2, 0.3, seed=38)
    box = NoisyBlackBox(problem, np.random.default_rng(39))
    wrapped = wrap_repeat_g(RandomSearch(2, seed=40), RegretConfig(g_exponent=1.0))
    trace = RunTrace()
    for _ in range(500):
        pt = wrapped.ask()[0]
        y = box(pt)
        trace.append(pt, y, wrapped.recommend())
        wrapped.tell(np.array([y]))
    if box.eval_count != len(trace) or box.eval_count != 500:
        return False, f"repeat wrapper: {box.eval_count} calls, {len(trace)} records"
    return True, "five algorithms plus both wrappers"


def check_slope_recovery():
    """Least-squares slope recovers n**-beta for beta in (0, 0.5, 1, 1.5) to 1e-9."""
    n = np.unique(np.round(10 ** np.linspace(0, 5, 80)).astype(int))
    for beta in (0.0, 0.5, 1.0, 1.5):
        series = RegretSeries("SR", n, 3.7 * n.astype(float) ** -beta)
        est = estimate_slope(series, (int(n[0]), int(n[-1])))
        if abs(est.slope + beta) > 1e-9:
            return False, f"beta={beta}: slope {est.slope}"
        if est.residual_rms > 1e-9:
            return False, f"beta={beta}: residual {est.residual_rms}"
    return True, "beta in (0, 0.5, 1, 1.5)"


def check_quantile_monotonicity():
    """Window max dominates any lower window quantile at every index."""
    rng = np.random.default_rng(41)
    problem = make_sphere_problem(2, 0.3, seed=42)
    for _ in range(20):
        n = int(rng.integers(20, 500))
        trace = _random_trace(problem, rng, n)
        top = rsr_stream(problem, trace, RegretConfig(quantile=1.0)).values
        for q in (0.3, 0.7, 0.9):
            lower = rsr_stream(problem, trace, RegretConfig(quantile=q)).values
            if np.any(top < lower):
                return False, f"q={q} exceeds the max variant"
    return True, "20 traces, q in (0.3,0.7,0.9) vs 1.0"


def check_kernel_contract_equivalence():
    """Fused kernels reproduce the ask/tell path bit-for-bit at 3000 evaluations."""
    for spec in _small_specs(budget=3000, seed=43):
        fast = harness.run_single(spec, 0)
        slow = harness.run_single(spec, 0, force_generic=True)
        for kind in ("SR", "ASR", "RSR"):
            if not np.array_equal(fast.series[kind].values, slow.series[kind].values):
                return False, f"{spec.spec_id}: {kind} differs between paths"
    return True, "seven run setups, SR/ASR/RSR bit-equal"


def check_run_determinism():
    """Identical (seed, replicate) twice gives bit-identical series."""
    spec = harness.ExperimentSpec(
        spec_id="shamir", algorithm="shamir", dim=2, noise_std=0.3,
        budget=1500, replicates=1, master_seed=47,
    )
    a = harness.run_single(spec, 0)
    b = harness.run_single(spec, 0)
    for kind in ("SR", "ASR", "RSR"):
        if not np.array_equal(a.series[kind].values, b.series[kind].values):
            return False, f"{kind} not reproducible"
    return True, "re-run bit-identical"


def check_fake_offspring_inert():
    """Selection trajectory is identical with and without fake offspring."""
    schedule = ResamplingSchedule(kind="exponential", base=1.0, growth=2.0)
    plain = OnePlusOneES(2, ESConfig(schedule=schedule), seed=53)
    fake = OnePlusOneES(2, ESConfig(schedule=schedule, fake_offspring=True), seed=53)
    rng = np.random.default_rng(54)
    for it in range(10):
        r = plain.resamples(plain.iteration)
        bp = plain.ask()
        bf = fake.ask()
        if not np.array_equal(bp, bf[: 2 * r]):
            return False, f"selection points differ at iteration {it + 1}"
        shared = rng.standard_normal(2 * r)
        plain.tell(shared)
        fake.tell(np.concatenate([shared, rng.standard_normal(r) + 100.0]))
        if not np.array_equal(plain.parent, fake.parent) or plain.sigma != fake.sigma:
            return False, f"parents diverge at iteration {it + 1}"
    return True, "10 iterations, parents bit-identical"


def check_probe_wrapper_isolation():
    """The base optimizer never sees probe values: states match an unwrapped twin."""
    plain = ShamirSGD(2, ShamirConfig(), seed=59)
    wrapped = wrap_probe_recommendation(ShamirSGD(2, ShamirConfig(), seed=59), period=2)
    rng = np.random.default_rng(60)
    plain_pts = []
    wrapped_pts = []
    for n in range(1, 201):
        pw = wrapped.ask()[0]
        if n % 2 == 0:
            wrapped.tell(np.array([1e9]))  # probe; value must be discarded
            continue
        pp = plain.ask()[0]
        plain_pts.append(pp)
        wrapped_pts.append(pw)
        v = rng.standard_normal()
        plain.tell(np.array([v]))
        wrapped.tell(np.array([v]))
        if not np.array_equal(plain.xhat, wrapped.base.xhat):
            return False, f"base state diverged at eval {n}"
    if not np.array_equal(np.asarray(plain_pts), np.asarray(wrapped_pts)):
        return False, "base search points differ"
    return True, "100 base iterations, state bit-identical"


CHECKS = [
    ("rsr_stream_equals_oracle", check_rsr_stream_equals_oracle),
    ("rsr_incremental_tracker", check_rsr_incremental_tracker),
    ("repeat_wrapper_rsr_bound", check_repeat_wrapper_rsr_bound),
    ("fabian_weights", check_fabian_weights),
    ("series_monotonicity", check_series_monotonicity),
    ("shamir_geometry", check_shamir_geometry),
    ("evaluation_accounting", check_evaluation_accounting),
    ("slope_recovery", check_slope_recovery),
    ("quantile_monotonicity", check_quantile_monotonicity),
    ("kernel_contract_equivalence", check_kernel_contract_equivalence),
    ("run_determinism", check_run_determinism),
    ("fake_offspring_inert", check_fake_offspring_inert),
    ("probe_wrapper_isolation", check_probe_wrapper_isolation),
]


def run_selfchecks(report=print):
    """Run every registered check; returns True iff all pass."""
    all_ok = True
    for name, fn in CHECKS:
        try:
            ok, detail = fn()
        except Exception as exc:  # noqa: BLE001 - a crashing check is a failing check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        all_ok &= ok
        if report is not None:
            report(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    return all_ok

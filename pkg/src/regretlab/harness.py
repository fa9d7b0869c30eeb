"""Experiment harness: seeded replicate runs, checkpointed regrets, slope fits.

A run drives one optimizer on a fresh sphere instance to an exact evaluation
budget, observing every evaluation with streaming regret trackers and
reporting SR/ASR/RSR at log-spaced checkpoints.  Replicates differ only in
their derived random streams (and hence also in the hidden optimum, which is
redrawn per replicate); everything is deterministic given
``(master_seed, spec id, replicate index)``, independent of scheduling.
"""

from __future__ import annotations

import math
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._fastmath import sq_dist_rows
from .problem import NoisyBlackBox, RunTrace, make_sphere_problem, true_value
from .regret import (
    ZERO_FLOOR,
    RegretConfig,
    RegretSeries,
    RsrStream,
    SlopeEstimate,
    default_g,
    estimate_slope,
    rsr_from_values,
)
from .optimizers import (
    ESConfig,
    FabianConfig,
    OnePlusOneES,
    RandomSearch,
    ResamplingSchedule,
    ShamirConfig,
    ShamirSGD,
    FabianSA,
    wrap_probe_recommendation,
)
from . import kernels

__all__ = [
    "ExperimentSpec",
    "ReplicateResult",
    "RunResult",
    "SuiteResult",
    "log_spaced_checkpoints",
    "run_single",
    "aggregate_runs",
    "run_suite",
    "fig1_suite",
    "acceptance_suite",
    "REGRET_KINDS",
    "AGGREGATIONS",
]

REGRET_KINDS = ("SR", "ASR", "RSR")
#: aggregations that get slope fits and summary rows
AGGREGATIONS = ("mean", "median")

_ALGORITHMS = ("rs", "es", "shamir", "fabian")


@dataclass(frozen=True)
class ExperimentSpec:
    """One (algorithm, problem, budget) experiment with its replicate count."""

    spec_id: str
    algorithm: str
    dim: int
    noise_std: float
    budget: int
    replicates: int
    master_seed: int
    checkpoints_per_decade: int = 20
    regret: RegretConfig = field(default_factory=RegretConfig)
    slope_window_fraction: float = 0.01
    algo_config: object = None
    probe_period: int | None = None
    suite_id: str = "adhoc"

    def __post_init__(self):
        if self.algorithm not in _ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; expected one of {_ALGORITHMS}")
        if self.budget < 100:
            raise ValueError(f"budget must be >= 100, got {self.budget}")
        if self.replicates < 1:
            raise ValueError(f"replicates must be >= 1, got {self.replicates}")
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        if self.noise_std < 0:
            raise ValueError(f"noise_std must be >= 0, got {self.noise_std}")
        if self.checkpoints_per_decade < 1:
            raise ValueError("checkpoints_per_decade must be >= 1")
        if self.probe_period is not None and self.probe_period < 2:
            raise ValueError(f"probe_period must be >= 2, got {self.probe_period}")
        if not 0 < self.slope_window_fraction < 1:
            raise ValueError("slope_window_fraction must be in (0, 1)")

    def slope_window(self) -> tuple:
        n_lo = max(1, int(round(self.budget * self.slope_window_fraction)))
        return (n_lo, self.budget)


@dataclass
class ReplicateResult:
    """Checkpointed regret series of one replicate, plus step-size diagnostics."""

    replicate: int
    checkpoints: np.ndarray
    series: dict
    sigma: np.ndarray | None = None
    rec_dist_over_sigma: np.ndarray | None = None
    trace: RunTrace | None = None


@dataclass
class RunResult:
    """All replicates of one spec with aggregated series and slope fits."""

    spec: ExperimentSpec
    checkpoints: np.ndarray
    replicates: list
    aggregates: dict
    slopes: dict

    def slope(self, kind: str, aggregation: str = "mean") -> SlopeEstimate:
        return self.slopes[(kind, aggregation)]


@dataclass
class SuiteResult:
    results: list
    failures: list  # (spec_id, error message)


def log_spaced_checkpoints(budget: int, per_decade: int = 20) -> np.ndarray:
    """Sorted unique evaluation indices, ~per_decade per factor of 10, with 1 and budget."""
    if budget < 10:
        raise ValueError(f"budget must be >= 10, got {budget}")
    if per_decade < 1:
        raise ValueError(f"per_decade must be >= 1, got {per_decade}")
    kmax = int(math.ceil(math.log10(budget) * per_decade))
    vals = np.round(10.0 ** (np.arange(kmax + 1) / per_decade)).astype(np.int64)
    vals = vals[vals <= budget]
    return np.unique(np.concatenate([vals, [1, budget]]))


def _replicate_seed(spec: ExperimentSpec, replicate: int) -> np.random.SeedSequence:
    spec_key = zlib.crc32(spec.spec_id.encode("utf-8"))
    return np.random.SeedSequence(spec.master_seed, spawn_key=(spec_key, replicate))


def build_optimizer(spec: ExperimentSpec, alg_seed, budget: int | None = None):
    """Instantiate the spec's optimizer (without probe wrapping)."""
    if spec.algorithm == "rs":
        return RandomSearch(spec.dim, alg_seed)
    if spec.algorithm == "es":
        cfg = spec.algo_config if spec.algo_config is not None else ESConfig()
        return OnePlusOneES(spec.dim, cfg, alg_seed, budget=budget)
    if spec.algorithm == "shamir":
        cfg = spec.algo_config if spec.algo_config is not None else ShamirConfig()
        return ShamirSGD(spec.dim, cfg, alg_seed)
    if spec.algorithm == "fabian":
        cfg = spec.algo_config if spec.algo_config is not None else FabianConfig()
        return FabianSA(spec.dim, cfg, alg_seed)
    raise ValueError(f"unknown algorithm {spec.algorithm!r}")


def _kernel_supported(spec: ExperimentSpec) -> bool:
    if spec.algorithm == "rs":
        return spec.probe_period is None
    if spec.algorithm == "shamir":
        return True
    if spec.algorithm == "fabian":
        return spec.probe_period is None
    if spec.algorithm == "es":
        cfg = spec.algo_config if spec.algo_config is not None else ESConfig()
        return (
            spec.probe_period is None
            and cfg.schedule.kind == "none"
            and not cfg.fake_offspring
        )
    return False


def _drive_generic(optimizer, box: NoisyBlackBox, problem, budget: int, keep_trace: bool):
    """Ask/tell loop with streaming per-evaluation regret recording.

    Returns dense per-evaluation SR, ASR, and (when the optimizer exposes a
    step size) sigma arrays; the final partial batch, if the budget expires
    mid-batch, is evaluated up to the budget and never told.
    """
    sr_all = np.empty(budget)
    asr_all = np.empty(budget)
    sig_all = np.empty(budget) if hasattr(optimizer, "sigma") else None
    trace = RunTrace() if keep_trace else None
    base_tv = true_value(problem, problem.optimum)
    cur_asr = np.inf
    n = 0
    while n < budget:
        batch = np.atleast_2d(np.asarray(optimizer.ask(), dtype=np.float64))
        rec = optimizer.recommend()
        sr_val = true_value(problem, rec) - base_tv
        k = min(batch.shape[0], budget - n)
        pts = batch[:k]
        values = box.evaluate_batch(pts)
        tv = sq_dist_rows(pts, problem.optimum) - base_tv
        seg = np.minimum(np.minimum.accumulate(tv), cur_asr)
        sr_all[n : n + k] = sr_val
        asr_all[n : n + k] = seg
        cur_asr = seg[-1]
        if sig_all is not None:
            sig_all[n : n + k] = optimizer.sigma
        if trace is not None:
            for i in range(k):
                trace.append(pts[i], values[i], rec)
        n += k
        if k == batch.shape[0]:
            optimizer.tell(values)
        else:
            break
    if box.eval_count != budget:
        raise AssertionError(
            f"evaluation accounting mismatch: consumed {box.eval_count}, budget {budget}"
        )
    return sr_all, asr_all, sig_all, trace


def _drive_memory_capped(optimizer, box: NoisyBlackBox, problem, spec: ExperimentSpec):
    """Ask/tell loop with bounded-memory trackers instead of dense arrays.

    Keeps only scalars plus the trailing window the RSR tracker needs
    (capacity g(budget), enough for every window since g is nondecreasing);
    checkpoint values stay exact because every evaluation is still observed.
    """
    budget = spec.budget
    checkpoints = log_spaced_checkpoints(budget, spec.checkpoints_per_decade)
    tracker = RsrStream(spec.regret, capacity=default_g(budget, spec.regret.g_exponent))
    base_tv = true_value(problem, problem.optimum)
    sr_cp = np.empty(checkpoints.size)
    asr_cp = np.empty(checkpoints.size)
    rsr_cp = np.empty(checkpoints.size)
    sig_cp = np.empty(checkpoints.size) if hasattr(optimizer, "sigma") else None
    cur_asr = np.inf
    ci = 0
    n = 0
    while n < budget:
        batch = np.atleast_2d(np.asarray(optimizer.ask(), dtype=np.float64))
        rec = optimizer.recommend()
        sr_val = true_value(problem, rec) - base_tv
        k = min(batch.shape[0], budget - n)
        pts = batch[:k]
        values = box.evaluate_batch(pts)
        tv = sq_dist_rows(pts, problem.optimum) - base_tv
        for i in range(k):
            cur_asr = min(cur_asr, tv[i])
            rsr = tracker.push(sr_val)
            n += 1
            if ci < checkpoints.size and n == checkpoints[ci]:
                sr_cp[ci] = sr_val
                asr_cp[ci] = cur_asr
                rsr_cp[ci] = rsr
                if sig_cp is not None:
                    sig_cp[ci] = optimizer.sigma
                ci += 1
        if k == batch.shape[0]:
            optimizer.tell(values)
        else:
            break
    if box.eval_count != budget:
        raise AssertionError(
            f"evaluation accounting mismatch: consumed {box.eval_count}, budget {budget}"
        )
    series = {
        "SR": RegretSeries("SR", checkpoints, sr_cp),
        "ASR": RegretSeries("ASR", checkpoints, asr_cp),
        "RSR": RegretSeries("RSR", checkpoints, rsr_cp),
    }
    ratio = None
    if sig_cp is not None:
        ratio = np.sqrt(np.maximum(sr_cp, 0.0)) / sig_cp
    return ReplicateResult(
        replicate=0,
        checkpoints=checkpoints,
        series=series,
        sigma=sig_cp,
        rec_dist_over_sigma=ratio,
    )


def run_single(
    spec: ExperimentSpec,
    replicate: int,
    force_generic: bool = False,
    keep_trace: bool = False,
    memory_capped: bool = False,
) -> ReplicateResult:
    """Run one replicate to exactly ``spec.budget`` evaluations.

    A fused kernel is used when available (and neither a trace nor
    memory-capped tracking is requested); otherwise the ask/tell objects are
    driven directly.  All paths are seed-paired and produce bit-identical
    series; ``memory_capped`` trades the dense per-evaluation arrays for
    bounded-memory streaming trackers.
    """
    ss = _replicate_seed(spec, replicate)
    prob_ss, noise_ss, alg_ss = ss.spawn(3)
    problem = make_sphere_problem(spec.dim, spec.noise_std, prob_ss)
    checkpoints = log_spaced_checkpoints(spec.budget, spec.checkpoints_per_decade)
    noise_rng = np.random.default_rng(noise_ss)
    sig_all = None
    trace = None

    if memory_capped:
        optimizer = build_optimizer(spec, alg_ss, budget=spec.budget)
        if spec.probe_period is not None:
            optimizer = wrap_probe_recommendation(optimizer, spec.probe_period)
        box = NoisyBlackBox(problem, noise_rng)
        result = _drive_memory_capped(optimizer, box, problem, spec)
        result.replicate = replicate
        return result

    use_kernel = _kernel_supported(spec) and not force_generic and not keep_trace
    if use_kernel:
        x_star = problem.optimum
        if spec.algorithm == "rs":
            sr_all, asr_all = kernels.run_random_search(
                x_star, spec.noise_std, spec.budget, alg_ss, noise_rng
            )
        elif spec.algorithm == "es":
            cfg = spec.algo_config if spec.algo_config is not None else ESConfig()
            sr_all, asr_all, sig_all = kernels.run_es11(
                x_star, spec.noise_std, cfg, spec.budget, alg_ss, noise_rng
            )
        elif spec.algorithm == "shamir":
            cfg = spec.algo_config if spec.algo_config is not None else ShamirConfig()
            sr_all, asr_all = kernels.run_shamir(
                x_star,
                spec.noise_std,
                cfg,
                spec.budget,
                alg_ss,
                noise_rng,
                probe_period=spec.probe_period or 0,
            )
        else:
            cfg = spec.algo_config if spec.algo_config is not None else FabianConfig()
            sr_all, asr_all = kernels.run_fabian(
                x_star, spec.noise_std, cfg, spec.budget, alg_ss, noise_rng
            )
    else:
        optimizer = build_optimizer(spec, alg_ss, budget=spec.budget)
        if spec.probe_period is not None:
            optimizer = wrap_probe_recommendation(optimizer, spec.probe_period)
        box = NoisyBlackBox(problem, noise_rng)
        sr_all, asr_all, sig_all, trace = _drive_generic(
            optimizer, box, problem, spec.budget, keep_trace
        )

    rsr_all = rsr_from_values(sr_all, spec.regret)
    pos = checkpoints - 1
    series = {
        "SR": RegretSeries("SR", checkpoints, sr_all[pos]),
        "ASR": RegretSeries("ASR", checkpoints, asr_all[pos]),
        "RSR": RegretSeries("RSR", checkpoints, rsr_all[pos]),
    }
    sigma_cp = None
    ratio_cp = None
    if sig_all is not None:
        sigma_cp = sig_all[pos]
        ratio_cp = np.sqrt(np.maximum(sr_all[pos], 0.0)) / sigma_cp
    return ReplicateResult(
        replicate=replicate,
        checkpoints=checkpoints,
        series=series,
        sigma=sigma_cp,
        rec_dist_over_sigma=ratio_cp,
        trace=trace,
    )


def aggregate_runs(replicates: list, window: tuple) -> tuple:
    """Per-checkpoint mean/median/geomean across replicates plus slope fits.

    Slopes are fitted (least squares in log-log) on the mean and median
    series; the geometric mean (mean of logs) is reported alongside so both
    aggregation conventions are available.
    """
    if not replicates:
        raise ValueError("need at least one replicate")
    checkpoints = replicates[0].checkpoints
    for r in replicates[1:]:
        if not np.array_equal(r.checkpoints, checkpoints):
            raise ValueError("replicates have mismatched checkpoints")
    aggregates = {}
    slopes = {}
    for kind in REGRET_KINDS:
        mat = np.vstack([r.series[kind].values for r in replicates])
        aggregates[kind] = {
            "mean": mat.mean(axis=0),
            "median": np.median(mat, axis=0),
            "geomean": np.exp(np.mean(np.log(np.maximum(mat, ZERO_FLOOR)), axis=0)),
        }
        for agg in AGGREGATIONS:
            series = RegretSeries(kind, checkpoints, aggregates[kind][agg])
            slopes[(kind, agg)] = estimate_slope(series, window)
    return aggregates, slopes


def run_spec(spec: ExperimentSpec, threads: int = 1, force_generic: bool = False) -> RunResult:
    """All replicates of one spec, optionally in parallel, plus aggregation."""
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            reps = list(pool.map(lambda i: run_single(spec, i, force_generic), range(spec.replicates)))
    else:
        reps = [run_single(spec, i, force_generic) for i in range(spec.replicates)]
    aggregates, slopes = aggregate_runs(reps, spec.slope_window())
    return RunResult(
        spec=spec,
        checkpoints=reps[0].checkpoints,
        replicates=reps,
        aggregates=aggregates,
        slopes=slopes,
    )


def run_suite(specs: list, threads: int = 1, progress=None) -> SuiteResult:
    """Execute every spec; failures are isolated per spec and the suite continues."""
    results = []
    failures = []
    for spec in specs:
        if progress is not None:
            progress(spec)
        try:
            results.append(run_spec(spec, threads=threads))
        except Exception as exc:  # noqa: BLE001 - isolation is the contract
            failures.append((spec.spec_id, f"{type(exc).__name__}: {exc}"))
    return SuiteResult(results=results, failures=failures)


def fig1_suite(
    budget: int = 10**6,
    replicates: int = 10,
    master_seed: int = 3,
    dim: int = 2,
    noise_std: float = 0.3,
    suite_id: str = "paper-fig1",
) -> list:
    """The built-in benchmark suite: five algorithms on the noisy sphere.

    Parameter sets: one-point gradient sketch (epsilon=0.3, lambda_step=0.1,
    ball 3), weighted central differences (s=4, alpha=1, gamma=0.01, a=c=1),
    plain (1+1)-ES, (1+1)-ES with 2**n resampling, and random search.
    """
    common = dict(
        dim=dim,
        noise_std=noise_std,
        budget=budget,
        replicates=replicates,
        master_seed=master_seed,
        suite_id=suite_id,
    )
    return [
        ExperimentSpec(spec_id="rs", algorithm="rs", **common),
        ExperimentSpec(spec_id="es", algorithm="es", algo_config=ESConfig(), **common),
        ExperimentSpec(
            spec_id="es_resamp",
            algorithm="es",
            algo_config=ESConfig(schedule=ResamplingSchedule(kind="exponential", base=1.0, growth=2.0)),
            **common,
        ),
        ExperimentSpec(spec_id="shamir", algorithm="shamir", algo_config=ShamirConfig(), **common),
        ExperimentSpec(spec_id="fabian", algorithm="fabian", algo_config=FabianConfig(), **common),
    ]


def acceptance_suite(
    budget: int = 10**6,
    replicates: int = 10,
    master_seed: int = 3,
    dim: int = 2,
    noise_std: float = 0.3,
) -> list:
    """fig1 suite plus the fake-offspring ES and the probe-wrapped gradient sketch."""
    specs = fig1_suite(budget, replicates, master_seed, dim, noise_std, suite_id="acceptance")
    common = dict(
        dim=dim,
        noise_std=noise_std,
        budget=budget,
        replicates=replicates,
        master_seed=master_seed,
        suite_id="acceptance",
    )
    specs.append(
        ExperimentSpec(
            spec_id="mes_r",
            algorithm="es",
            algo_config=ESConfig(
                schedule=ResamplingSchedule(kind="exponential", base=1.0, growth=2.0),
                fake_offspring=True,
            ),
            **common,
        )
    )
    specs.append(
        ExperimentSpec(
            spec_id="shamir_probe",
            algorithm="shamir",
            algo_config=ShamirConfig(),
            probe_period=2,
            **common,
        )
    )
    return specs

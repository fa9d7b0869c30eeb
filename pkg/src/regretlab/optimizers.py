"""Black-box optimizers behind a uniform ask/tell/recommend contract.

Contract: ``ask()`` returns a ``(k, dim)`` batch of search points, ``tell()``
delivers the k noisy values once all of them have been evaluated, and
``recommend()`` is the current guess of the optimum.  Optimizers never touch
an objective directly -- the driver evaluates -- and therefore can never see
noise-free values.  When a budget runs out mid-batch, the driver evaluates a
prefix and never calls ``tell``; the optimizer's state simply stays at the
last completed update.

Recommendation recording convention: the driver queries ``recommend()`` once
per batch, right after ``ask()``, so the value recorded for every evaluation
index inside a batch reflects only information available before that batch was
told.  Updates take effect from the first index of the following batch.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from ._fastmath import sq_norm
from .regret import RegretConfig, default_g

__all__ = [
    "Optimizer",
    "ResamplingSchedule",
    "ESConfig",
    "ShamirConfig",
    "FabianConfig",
    "RandomSearch",
    "OnePlusOneES",
    "ShamirSGD",
    "FabianSA",
    "fabian_weights",
    "wrap_repeat_g",
    "wrap_probe_recommendation",
    "RepeatSearchPoints",
    "ProbeRecommendation",
]

# resampling counts are capped here before budget-based capping kicks in,
# so float overflow in the exponential schedule can never materialize
_R_HARD_CAP = 1 << 62


class Optimizer:
    """Ask/tell/recommend state machine. Subclasses own all algorithm state."""

    dim: int

    def ask(self) -> np.ndarray:
        raise NotImplementedError

    def tell(self, values: np.ndarray) -> None:
        raise NotImplementedError

    def recommend(self) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class ResamplingSchedule:
    """Number of repeated noisy evaluations per point at iteration n.

    ``none`` is a single evaluation, ``constant`` uses ``count`` evaluations,
    ``exponential`` uses ``max(1, round(base * growth**n))``.
    """

    kind: str = "none"
    count: int = 1
    base: float = 1.0
    growth: float = 2.0

    def __post_init__(self):
        if self.kind not in ("none", "constant", "exponential"):
            raise ValueError(f"unknown resampling kind {self.kind!r}")
        if self.kind == "constant" and self.count < 1:
            raise ValueError(f"constant resampling needs count >= 1, got {self.count}")
        if self.kind == "exponential":
            if not self.base > 0:
                raise ValueError(f"exponential resampling needs base > 0, got {self.base}")
            if not self.growth > 1:
                raise ValueError(f"exponential resampling needs growth > 1, got {self.growth}")

    def __call__(self, iteration: int) -> int:
        if self.kind == "none":
            return 1
        if self.kind == "constant":
            return self.count
        if math.log(self.base) + iteration * math.log(self.growth) >= math.log(_R_HARD_CAP):
            return _R_HARD_CAP
        return max(1, int(round(self.base * self.growth**iteration)))


@dataclass(frozen=True)
class ESConfig:
    """(1+1) evolution strategy settings with multiplicative step-size control.

    ``success_up``/``failure_down`` steer the step size toward a fixed success
    rate.  The defaults (1.5, 1.5**-0.5) shrink on failure twice as fast, in
    log scale, as the classic one-fifth-rule pairing: under an exponential
    resampling schedule a whole run spans only ~20 iterations, and the slower
    classic shrink cannot track the shrinking distance to the optimum in so
    few steps.  ``fake_offspring`` additionally emits, per iteration, r(n)
    selection-inert points drawn from the same mutation distribution and
    evaluated once each.
    """

    mu: int = 1
    lambda_: int = 1
    sigma0: float = 0.3
    schedule: ResamplingSchedule = field(default_factory=ResamplingSchedule)
    success_up: float = 1.5
    failure_down: float = 1.5**-0.5
    fake_offspring: bool = False

    def __post_init__(self):
        if self.mu < 1 or self.lambda_ < 1 or self.mu > self.lambda_:
            raise ValueError(f"need 1 <= mu <= lambda, got mu={self.mu}, lambda={self.lambda_}")
        if not self.sigma0 > 0:
            raise ValueError(f"sigma0 must be > 0, got {self.sigma0}")
        if not self.success_up > 1:
            raise ValueError(f"success_up must be > 1, got {self.success_up}")
        if not 0 < self.failure_down < 1:
            raise ValueError(f"failure_down must be in (0, 1), got {self.failure_down}")
        if self.fake_offspring and self.schedule.kind != "exponential":
            raise ValueError("fake offspring require an exponential resampling schedule")


@dataclass(frozen=True)
class ShamirConfig:
    """One-point gradient sketch parameters: probe radius, step denominator, projection ball."""

    epsilon: float = 0.3
    lambda_step: float = 0.1
    ball_radius: float = 3.0

    def __post_init__(self):
        for name in ("epsilon", "lambda_step", "ball_radius"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")


@dataclass(frozen=True)
class FabianConfig:
    """Averaged central-difference stochastic approximation parameters.

    Gains are ``a_n = a / n**alpha`` and probe scales ``c_n = c / n**gamma``;
    ``alpha`` is pinned to 1.  ``s`` must be even; s*dim evaluations are spent
    per iteration.
    """

    s: int = 4
    a: float = 1.0
    alpha: float = 1.0
    c: float = 1.0
    gamma: float = 0.01

    def __post_init__(self):
        if self.s < 2 or self.s % 2 != 0:
            raise ValueError(f"s must be an even integer >= 2, got {self.s}")
        if self.s // 2 > 16:
            raise ValueError(f"s/2 must be <= 16 for a solvable weight system, got s={self.s}")
        if self.alpha != 1.0:
            raise ValueError(f"alpha is fixed to 1, got {self.alpha}")
        if not 0 < self.gamma < 0.5:
            raise ValueError(f"gamma must satisfy 0 < gamma < 1/2, got {self.gamma}")
        if not self.a > 0 or not self.c > 0:
            raise ValueError("a and c must be > 0")
        # quadratic-bowl stability: smallest Hessian eigenvalue is 2
        beta0 = min(2 * self.s * self.gamma, 1 - 2 * self.gamma)
        if not 2 * 2.0 * self.a > beta0:
            warnings.warn(
                f"gain a={self.a} violates the stability condition 4a > {beta0:.3g} "
                "on the quadratic bowl; convergence is not guaranteed",
                stacklevel=2,
            )


def fabian_weights(s: int) -> np.ndarray:
    """Difference weights v solving ``U v = e1/2`` with ``U[i, j] = u_j**(2i-1)``, ``u_j = 1/j``.

    One step of iterative refinement keeps the residual tight; a residual
    above 1e-10 (the system is Vandermonde-like and degrades quickly with s)
    raises.
    """
    if s < 2 or s % 2 != 0:
        raise ValueError(f"s must be an even integer >= 2, got {s}")
    s2 = s // 2
    if s2 > 16:
        raise ValueError(f"s/2 must be <= 16, got {s2}")
    u = 1.0 / np.arange(1, s2 + 1, dtype=np.float64)
    powers = 2 * np.arange(1, s2 + 1, dtype=np.int64)[:, None] - 1
    U = u[None, :] ** powers
    b = np.zeros(s2)
    b[0] = 0.5
    v = np.linalg.solve(U, b)
    v = v + np.linalg.solve(U, b - U @ v)
    residual = float(np.linalg.norm(U @ v - b))
    if residual > 1e-10:
        raise ValueError(f"weight system residual {residual:.3g} exceeds 1e-10; s={s} too large")
    return v


def _as_seed_sequence(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


class RandomSearch(Optimizer):
    """Uniform sampling over [0,1]^dim keeping the best observed noisy value.

    The first point doubles as the initial recommendation; afterwards a point
    replaces the incumbent only on strict improvement of its (single) noisy
    value, so ties keep the incumbent.
    """

    def __init__(self, dim: int, seed):
        self.dim = dim
        self._rng = np.random.default_rng(_as_seed_sequence(seed))
        self._pending = None
        self._best_point = None
        self._best_value = math.inf

    def ask(self) -> np.ndarray:
        self._pending = self._rng.random(self.dim)
        return self._pending[None, :].copy()

    def tell(self, values) -> None:
        v = float(np.asarray(values).ravel()[0])
        if v < self._best_value:
            self._best_value = v
            self._best_point = self._pending
        self._pending = None

    def recommend(self) -> np.ndarray:
        if self._best_point is not None:
            return self._best_point.copy()
        if self._pending is not None:
            return self._pending.copy()
        raise RuntimeError("recommend() called before the first ask()")


class OnePlusOneES(Optimizer):
    """(1+1) evolution strategy with per-iteration resampling under noise.

    Each iteration draws one Gaussian offspring, evaluates offspring and
    parent r(n) times each with fresh noise (cached parent averages are a
    known trap: a lucky old average freezes progress), and replaces the parent
    only on strict improvement of the averaged values.  Step size follows the
    one-fifth rule factors from the config.

    With ``fake_offspring`` enabled, r(n) additional points from the same
    mutation distribution are appended to the batch, evaluated once each, and
    ignored by selection.  They are drawn from a dedicated random stream so
    the selection trajectory is bit-identical with and without them.
    """

    def __init__(self, dim: int, config: ESConfig, seed, budget: int | None = None):
        if config.mu != 1 or config.lambda_ != 1:
            raise NotImplementedError("only the (1+1) configuration is supported")
        self.dim = dim
        self.config = config
        mut_ss, fake_ss = _as_seed_sequence(seed).spawn(2)
        self._rng_mut = np.random.default_rng(mut_ss)
        self._rng_fake = np.random.default_rng(fake_ss)
        self.parent = self._rng_mut.random(dim)
        self.sigma = float(config.sigma0)
        self.iteration = 1
        self.budget = budget
        self._evals_done = 0
        self._pending = None

    def resamples(self, iteration: int) -> int:
        """r(n) after capping at the remaining evaluation budget."""
        r = self.config.schedule(iteration)
        if self.budget is not None:
            r = min(r, max(1, self.budget - self._evals_done))
        return r

    def ask(self) -> np.ndarray:
        r = self.resamples(self.iteration)
        offspring = self.parent + self.sigma * self._rng_mut.standard_normal(self.dim)
        rows = [np.tile(offspring, (r, 1)), np.tile(self.parent, (r, 1))]
        if self.config.fake_offspring:
            fakes = self.parent + self.sigma * self._rng_fake.standard_normal((r, self.dim))
            rows.append(fakes)
        self._pending = (offspring, r)
        return np.vstack(rows)

    def tell(self, values) -> None:
        if self._pending is None:
            raise RuntimeError("tell() without a pending ask()")
        offspring, r = self._pending
        values = np.asarray(values, dtype=np.float64).ravel()
        expected = (3 * r) if self.config.fake_offspring else (2 * r)
        if values.size != expected:
            raise ValueError(f"expected {expected} values, got {values.size}")
        off_avg = float(np.mean(values[:r]))
        par_avg = float(np.mean(values[r : 2 * r]))
        if off_avg < par_avg:
            self.parent = offspring
            self.sigma *= self.config.success_up
        else:
            self.sigma *= self.config.failure_down
        self._evals_done += values.size
        self.iteration += 1
        self._pending = None

    def recommend(self) -> np.ndarray:
        return self.parent.copy()


class ShamirSGD(Optimizer):
    """Projected SGD on a one-point gradient sketch, one evaluation per iteration.

    The iterate starts at the origin; the search point is probed at exact
    distance ``epsilon`` (offset ``(epsilon/sqrt(d)) * r`` with Rademacher r),
    the sketch ``g = (sqrt(d) v / epsilon) r`` is followed downhill with step
    ``1/(lambda_step * n)``, and iterates are projected onto the centered ball
    of radius ``ball_radius``.  The recommendation is the running average of
    the trailing half of the iterate history, so it converges even though the
    search points never do.
    """

    def __init__(self, dim: int, config: ShamirConfig, seed):
        self.dim = dim
        self.config = config
        self._rng = np.random.default_rng(_as_seed_sequence(seed))
        self.xhat = np.zeros(dim)
        self.xhat_history = [self.xhat.copy()]
        self._cumsum = [np.zeros(dim), self.xhat.copy()]  # cumsum[t] = sum of first t iterates
        self.iteration = 1
        self._pending_signs = None

    def ask(self) -> np.ndarray:
        signs = 2.0 * self._rng.integers(0, 2, size=self.dim) - 1.0
        coef = self.config.epsilon / math.sqrt(self.dim)
        self._pending_signs = signs
        return (self.xhat + coef * signs)[None, :]

    def tell(self, values) -> None:
        if self._pending_signs is None:
            raise RuntimeError("tell() without a pending ask()")
        v = float(np.asarray(values).ravel()[0])
        signs = self._pending_signs
        t = self.iteration
        c1 = math.sqrt(self.dim) * v / self.config.epsilon
        step = self.config.lambda_step * t
        xnew = self.xhat - (c1 * signs) / step
        nr = sq_norm(xnew)
        ball = self.config.ball_radius
        if nr > ball * ball:
            xnew = xnew * (ball / math.sqrt(nr))
        self.xhat = xnew
        self.xhat_history.append(xnew.copy())
        self._cumsum.append(self._cumsum[-1] + xnew)
        self.iteration = t + 1
        self._pending_signs = None

    def recommend(self) -> np.ndarray:
        t = self.iteration
        lo = (t + 1) // 2  # ceil(t/2)
        cnt = t - lo + 1
        return (self._cumsum[t] - self._cumsum[lo - 1]) / cnt


class FabianSA(Optimizer):
    """Stochastic approximation with weighted multi-scale central differences.

    Iteration n probes ``x +- c_n * u_j * e_i`` for every coordinate i and
    scale j (s*dim evaluations), combines the pair differences with the
    precomputed weights into a gradient estimate, and steps with gain ``a_n``.
    The recommendation is the current iterate, held constant across the
    iteration's evaluations.
    """

    def __init__(self, dim: int, config: FabianConfig, seed):
        self.dim = dim
        self.config = config
        self.weights = fabian_weights(config.s)
        self.u = 1.0 / np.arange(1, config.s // 2 + 1, dtype=np.float64)
        self._rng = np.random.default_rng(_as_seed_sequence(seed))
        self.x = self._rng.random(dim)
        self.iteration = 1
        self._pending_cn = None

    def ask(self) -> np.ndarray:
        t = self.iteration
        c_n = self.config.c / t**self.config.gamma
        s2 = self.config.s // 2
        points = np.empty((self.config.s * self.dim, self.dim))
        row = 0
        for j in range(s2):
            off = c_n * self.u[j]
            for i in range(self.dim):
                points[row] = self.x
                points[row, i] = self.x[i] + off
                points[row + 1] = self.x
                points[row + 1, i] = self.x[i] - off
                row += 2
        self._pending_cn = c_n
        return points

    def tell(self, values) -> None:
        if self._pending_cn is None:
            raise RuntimeError("tell() without a pending ask()")
        c_n = self._pending_cn
        s2 = self.config.s // 2
        values = np.asarray(values, dtype=np.float64).reshape(s2, self.dim, 2)
        acc = np.zeros(self.dim)
        for j in range(s2):
            acc = acc + self.weights[j] * (values[j, :, 0] - values[j, :, 1])
        grad = acc / c_n
        t = self.iteration
        a_n = self.config.a / t**self.config.alpha
        self.x = self.x - a_n * grad
        self.iteration = t + 1
        self._pending_cn = None

    def recommend(self) -> np.ndarray:
        return self.x.copy()


class RepeatSearchPoints(Optimizer):
    """Emit the n-th base search point ``1 + g(n)`` consecutive times.

    Every copy is evaluated; only the first value of each block reaches the
    base optimizer, and the recommendation is always the point currently being
    emitted.  This construction makes the windowed-worst-case regret of the
    wrapped run track the running-minimum regret of the base run.
    """

    def __init__(self, base: Optimizer, cfg: RegretConfig, g=None):
        self.base = base
        self.dim = base.dim
        self._g = g if g is not None else (lambda k: default_g(k, cfg.g_exponent))
        self._queue: list[np.ndarray] = []
        self._firsts: list[float] = []
        self._batch_blocks = 0
        self._blocks_done = 0
        self._point = None
        self._reps = 0
        self._emitted = 0
        self._told = 0
        self.base_points = 0

    def block_length(self, n: int) -> int:
        return 1 + int(self._g(n))

    def ask(self) -> np.ndarray:
        if self._point is None or self._emitted == self._reps:
            if not self._queue:
                pts = np.atleast_2d(np.asarray(self.base.ask(), dtype=np.float64))
                self._queue = [pts[i].copy() for i in range(pts.shape[0])]
                self._batch_blocks = len(self._queue)
                self._blocks_done = 0
                self._firsts = []
            self._point = self._queue.pop(0)
            self.base_points += 1
            self._reps = self.block_length(self.base_points)
            self._emitted = 0
            self._told = 0
        self._emitted += 1
        return self._point[None, :].copy()

    def tell(self, values) -> None:
        v = float(np.asarray(values).ravel()[0])
        if self._told == 0:
            self._firsts.append(v)
        self._told += 1
        if self._told == self._reps:
            self._blocks_done += 1
            if self._blocks_done == self._batch_blocks:
                self.base.tell(np.asarray(self._firsts))

    def recommend(self) -> np.ndarray:
        if self._point is None:
            raise RuntimeError("recommend() called before the first ask()")
        return self._point.copy()


class ProbeRecommendation(Optimizer):
    """Spend every ``period``-th evaluation at the base's current recommendation.

    Probe values are recorded in the trace but discarded, so the base consumes
    a budget reduced by the factor (period-1)/period and its state is
    unaffected by the probes.  Probing puts recommendation-quality points into
    the search-point stream, which is what running-minimum regret measures.
    """

    def __init__(self, base: Optimizer, period: int = 2):
        if period < 2:
            raise ValueError(f"period must be >= 2, got {period}")
        self.base = base
        self.dim = base.dim
        self.period = period
        self._eval_index = 0
        self._queue: list[np.ndarray] = []
        self._values: list[float] = []
        self._batch_len = 0
        self._probe_pending = False

    def ask(self) -> np.ndarray:
        if (self._eval_index + 1) % self.period == 0:
            self._probe_pending = True
            return self.base.recommend()[None, :].copy()
        if not self._queue:
            pts = np.atleast_2d(np.asarray(self.base.ask(), dtype=np.float64))
            self._queue = [pts[i].copy() for i in range(pts.shape[0])]
            self._batch_len = len(self._queue)
            self._values = []
        self._probe_pending = False
        return self._queue[0][None, :].copy()

    def tell(self, values) -> None:
        v = float(np.asarray(values).ravel()[0])
        self._eval_index += 1
        if self._probe_pending:
            self._probe_pending = False
            return
        self._queue.pop(0)
        self._values.append(v)
        if not self._queue and len(self._values) == self._batch_len:
            self.base.tell(np.asarray(self._values))
            self._values = []
            self._batch_len = 0

    def recommend(self) -> np.ndarray:
        return self.base.recommend()


def wrap_repeat_g(base: Optimizer, cfg: RegretConfig, g=None) -> RepeatSearchPoints:
    """Wrap ``base`` so its n-th search point is repeated ``1 + g(n)`` times."""
    return RepeatSearchPoints(base, cfg, g=g)


def wrap_probe_recommendation(base: Optimizer, period: int = 2) -> ProbeRecommendation:
    """Wrap ``base`` so every ``period``-th evaluation probes its recommendation."""
    return ProbeRecommendation(base, period)

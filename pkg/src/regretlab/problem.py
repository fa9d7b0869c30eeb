"""Noisy sphere objective, black-box evaluation, and per-evaluation run traces.

The central distinction maintained throughout the package is between *search
points* ``x_n`` (where one noisy evaluation is spent) and *recommendations*
``x_tilde_n`` (the optimizer's current guess of the optimum after n
evaluations).  A :class:`RunTrace` records both, one entry per evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ._fastmath import sq_dist, sq_dist_rows

__all__ = [
    "ProblemInstance",
    "EvaluationRecord",
    "RunTrace",
    "NoisyBlackBox",
    "make_sphere_problem",
    "noisy_eval",
    "true_value",
    "trace_append",
]


@dataclass(frozen=True)
class ProblemInstance:
    """A quadratic bowl ``||x - optimum||^2`` observed through additive Gaussian noise.

    Immutable after construction and safe to share across concurrent runs.
    ``lower``/``upper`` describe the axis-aligned sampling box; gradient-style
    optimizers are free to step outside it.
    """

    dim: int
    optimum: np.ndarray
    noise_std: float
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dimension must be >= 1, got {self.dim}")
        if self.noise_std < 0:
            raise ValueError(f"noise_std must be >= 0, got {self.noise_std}")
        opt = np.asarray(self.optimum, dtype=np.float64)
        if opt.shape != (self.dim,):
            raise ValueError(f"optimum has shape {opt.shape}, expected ({self.dim},)")
        object.__setattr__(self, "optimum", opt)
        object.__setattr__(self, "lower", np.asarray(self.lower, dtype=np.float64))
        object.__setattr__(self, "upper", np.asarray(self.upper, dtype=np.float64))
        if np.any(self.optimum < self.lower) or np.any(self.optimum > self.upper):
            raise ValueError("optimum must lie inside the domain box")

    def _check_dim(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.dim,):
            raise ValueError(f"point has shape {x.shape}, expected ({self.dim},)")
        return x


class EvaluationRecord(NamedTuple):
    """One spent evaluation: 1-based index, search point, observed noisy value."""

    index: int
    search_point: np.ndarray
    noisy_value: float


@dataclass
class RunTrace:
    """Per-evaluation history of search points, noisy values, and recommendations.

    Both sequences always have equal length: entry ``n`` holds the n-th search
    point and the recommendation in force after n evaluations.  Recommendations
    may repeat consecutively (iteration-based algorithms hold them constant
    across an iteration's evaluations).
    """

    search_points: list = field(default_factory=list)
    noisy_values: list = field(default_factory=list)
    recommendations: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.search_points)

    def append(self, x: np.ndarray, y: float, recommendation: np.ndarray) -> None:
        self.search_points.append(np.array(x, dtype=np.float64))
        self.noisy_values.append(float(y))
        self.recommendations.append(np.array(recommendation, dtype=np.float64))

    def record(self, n: int) -> EvaluationRecord:
        """The n-th evaluation record (1-based)."""
        if not 1 <= n <= len(self):
            raise IndexError(f"evaluation index {n} out of range 1..{len(self)}")
        return EvaluationRecord(n, self.search_points[n - 1], self.noisy_values[n - 1])

    def recommendation(self, n: int) -> np.ndarray:
        if not 1 <= n <= len(self):
            raise IndexError(f"evaluation index {n} out of range 1..{len(self)}")
        return self.recommendations[n - 1]

    def search_array(self) -> np.ndarray:
        return np.asarray(self.search_points, dtype=np.float64).reshape(len(self), -1)

    def recommendation_array(self) -> np.ndarray:
        return np.asarray(self.recommendations, dtype=np.float64).reshape(len(self), -1)


def make_sphere_problem(dim: int, noise_std: float, seed) -> ProblemInstance:
    """Draw a sphere instance with the optimum uniform in ``[0, 1]^dim``.

    ``seed`` may be an int or a ``numpy.random.SeedSequence``; identical seeds
    produce bit-identical instances.
    """
    if dim < 1:
        raise ValueError(f"dimension must be >= 1, got {dim}")
    rng = np.random.default_rng(seed)
    optimum = rng.random(dim)
    return ProblemInstance(
        dim=dim,
        optimum=optimum,
        noise_std=float(noise_std),
        lower=np.zeros(dim),
        upper=np.ones(dim),
    )


def true_value(problem: ProblemInstance, x: np.ndarray) -> float:
    """Noise-free objective ``||x - optimum||^2``.

    Harness-side oracle only: regret computation needs it, optimizers must
    never see it (they receive values through :class:`NoisyBlackBox`, which
    does not expose this function).
    """
    x = problem._check_dim(x)
    return sq_dist(x, problem.optimum)


def noisy_eval(problem: ProblemInstance, x: np.ndarray, noise_stream: np.random.Generator) -> float:
    """One noisy observation ``||x - optimum||^2 + noise_std * z``, z fresh standard normal.

    A draw is consumed from ``noise_stream`` even when ``noise_std`` is zero,
    so stream positions do not depend on the noise level.
    """
    x = problem._check_dim(x)
    z = noise_stream.standard_normal()
    return sq_dist(x, problem.optimum) + problem.noise_std * z


def trace_append(trace: RunTrace, x: np.ndarray, y: float, recommendation: np.ndarray) -> RunTrace:
    """Append one evaluation record plus its recommendation; returns the trace."""
    trace.append(x, y, recommendation)
    return trace


class NoisyBlackBox:
    """Counting black-box handle over a problem's noisy objective.

    This is the only evaluation interface a run exposes; the noise-free
    objective is reachable solely through :func:`true_value` on the problem,
    which this wrapper deliberately does not forward.
    """

    def __init__(self, problem: ProblemInstance, noise_stream: np.random.Generator):
        self._problem = problem
        self._noise = noise_stream
        self._count = 0

    @property
    def dim(self) -> int:
        return self._problem.dim

    @property
    def eval_count(self) -> int:
        return self._count

    def __call__(self, x: np.ndarray) -> float:
        self._count += 1
        return noisy_eval(self._problem, x, self._noise)

    def evaluate_batch(self, points: np.ndarray) -> np.ndarray:
        """Evaluate a ``(k, dim)`` batch; consumes k noise draws in row order."""
        points = np.asarray(points, dtype=np.float64)
        if points.ndim != 2 or points.shape[1] != self._problem.dim:
            raise ValueError(f"batch has shape {points.shape}, expected (k, {self._problem.dim})")
        k = points.shape[0]
        self._count += k
        tv = sq_dist_rows(points, self._problem.optimum)
        z = self._noise.standard_normal(k)
        return tv + self._problem.noise_std * z

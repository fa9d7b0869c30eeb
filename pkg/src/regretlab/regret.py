"""Regret metrics over run traces and log-log convergence-slope estimation.

Three metrics are computed from a trace, all against the noise-free objective:

* Simple Regret (SR): quality of the recommendation after n evaluations,
  ``F(x_tilde_n) - F(x*)``.  Not necessarily monotone.
* Approximate Simple Regret (ASR): running minimum of ``F(x_m) - F(x*)`` over
  search points ``m <= n``.  Non-increasing by construction.
* Robust Simple Regret (RSR): best (over k <= n) windowed worst-case (or
  q-quantile) of SR sustained over the trailing ``g(k)`` recommendations,
  with the window clamped at index 1.  Non-increasing by construction.

Every metric has a one-pass streaming implementation and, for RSR, an
independent brute-force oracle used to cross-check the streaming form
bit-for-bit.
"""

from __future__ import annotations

import math
from bisect import bisect_left, insort
from collections import deque
from dataclasses import dataclass

import numpy as np
from numba import njit

from .problem import ProblemInstance, RunTrace, true_value
from ._fastmath import sq_dist_rows

__all__ = [
    "RegretConfig",
    "RegretSeries",
    "SlopeEstimate",
    "RsrStream",
    "default_g",
    "g_values",
    "quantile_rank",
    "simple_regret",
    "sr_series",
    "asr",
    "asr_stream",
    "rsr_stream",
    "rsr_oracle",
    "rsr_from_values",
    "estimate_slope",
]

#: Regret values of exactly zero are clamped to this floor before taking logs.
ZERO_FLOOR = 1e-15


@dataclass(frozen=True)
class RegretConfig:
    """RSR window parameters: ``g(n) = ceil(ln(1+n)**g_exponent)`` and the window quantile.

    ``quantile=1.0`` selects the window maximum, which is the primary
    definition; smaller quantiles pick the empirical q-quantile instead.
    """

    g_exponent: float = 2.0
    quantile: float = 1.0

    def __post_init__(self):
        if not self.g_exponent > 0:
            raise ValueError(f"g_exponent must be > 0, got {self.g_exponent}")
        if not 0.0 < self.quantile <= 1.0:
            raise ValueError(f"quantile must be in (0, 1], got {self.quantile}")


def default_g(n: int, p: float) -> int:
    """Window length ``ceil(ln(1+n)**p)``; always >= 1 and nondecreasing in n."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return max(1, int(math.ceil(math.log1p(n) ** p)))


def g_values(n: int, p: float) -> np.ndarray:
    """Vectorized ``default_g`` for indices 1..n."""
    idx = np.arange(1, n + 1, dtype=np.float64)
    g = np.ceil(np.log1p(idx) ** p).astype(np.int64)
    return np.maximum(g, 1)


def quantile_rank(q: float, window_size: int) -> int:
    """1-based rank of the empirical q-quantile: smallest element with rank >= ceil(q*w)."""
    r = int(math.ceil(q * window_size))
    return min(max(r, 1), window_size)


@dataclass
class RegretSeries:
    """(evaluation index, regret value) pairs for one regret kind.

    Indices are strictly increasing; ASR and RSR series are additionally
    validated to be non-increasing, which their definitions guarantee.
    """

    kind: str
    n: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.kind not in ("SR", "ASR", "RSR"):
            raise ValueError(f"unknown regret kind {self.kind!r}")
        self.n = np.asarray(self.n, dtype=np.int64)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.n.shape != self.values.shape or self.n.ndim != 1:
            raise ValueError("n and values must be 1-d arrays of equal length")
        if self.n.size and np.any(np.diff(self.n) <= 0):
            raise ValueError("evaluation indices must be strictly increasing")
        if self.n.size and np.any(self.values < 0):
            raise ValueError("regret values must be nonnegative")
        if self.kind in ("ASR", "RSR") and self.n.size and np.any(np.diff(self.values) > 0):
            raise ValueError(f"{self.kind} series must be non-increasing")

    def __len__(self) -> int:
        return int(self.n.size)

    def at_indices(self, indices: np.ndarray) -> "RegretSeries":
        """Subsample the series at the given evaluation indices (must be present)."""
        pos = np.searchsorted(self.n, indices)
        if np.any(pos >= self.n.size) or np.any(self.n[pos] != indices):
            raise ValueError("requested indices are not all present in the series")
        return RegretSeries(self.kind, self.n[pos], self.values[pos])


@dataclass(frozen=True)
class SlopeEstimate:
    """Fitted log-log slope of a regret series over a fit window."""

    slope: float
    method: str
    window: tuple
    residual_rms: float
    n_points: int
    clamped: bool = False


# ---------------------------------------------------------------------------
# Simple regret and its running minimum
# ---------------------------------------------------------------------------


def simple_regret(problem: ProblemInstance, trace: RunTrace, n: int) -> float:
    """``F(x_tilde_n) - F(x*)`` for the recommendation recorded at index n."""
    rec = trace.recommendation(n)
    return true_value(problem, rec) - true_value(problem, problem.optimum)


def sr_series(problem: ProblemInstance, trace: RunTrace) -> RegretSeries:
    """Dense SR series over every evaluation index of the trace."""
    if len(trace) == 0:
        raise ValueError("trace is empty")
    recs = trace.recommendation_array()
    base = true_value(problem, problem.optimum)
    vals = sq_dist_rows(recs, problem.optimum) - base
    return RegretSeries("SR", np.arange(1, len(trace) + 1), vals)


def asr(problem: ProblemInstance, trace: RunTrace, n: int) -> float:
    """Running minimum of ``F(x_m) - F(x*)`` over search points m <= n."""
    if not 1 <= n <= len(trace):
        raise IndexError(f"evaluation index {n} out of range 1..{len(trace)}")
    pts = trace.search_array()[:n]
    base = true_value(problem, problem.optimum)
    return float(np.min(sq_dist_rows(pts, problem.optimum) - base))


def asr_stream(problem: ProblemInstance, trace: RunTrace) -> RegretSeries:
    """Dense ASR series (one-pass running minimum over search points)."""
    if len(trace) == 0:
        raise ValueError("trace is empty")
    pts = trace.search_array()
    base = true_value(problem, problem.optimum)
    vals = np.minimum.accumulate(sq_dist_rows(pts, problem.optimum) - base)
    return RegretSeries("ASR", np.arange(1, len(trace) + 1), vals)


# ---------------------------------------------------------------------------
# RSR: streaming engines and brute-force oracle
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def _rsr_scan_max(sr, g):
    """One-pass RSR with q = 1 (window maximum).

    Monotone deque of window suffix-maxima indices.  Because g may grow by
    more than one between steps, the window start can move backwards; dropped
    front indices are then re-inserted from the value array, scanning the
    re-opened range in descending order.
    """
    n = sr.size
    out = np.empty(n, np.float64)
    idx = np.empty(2 * n + 2, np.int64)
    head = n + 1
    tail = n + 1  # deque occupies idx[head:tail]
    rsr = np.inf
    prev_lo = 0
    for k in range(1, n + 1):
        lo = k - g[k - 1]
        if lo < 0:
            lo = 0
        v = sr[k - 1]
        while tail > head and sr[idx[tail - 1] - 1] <= v:
            tail -= 1
        idx[tail] = k
        tail += 1
        if lo > prev_lo:
            while head < tail and idx[head] <= lo:
                head += 1
        elif lo < prev_lo:
            for j in range(prev_lo, lo, -1):
                if sr[j - 1] > sr[idx[head] - 1]:
                    head -= 1
                    idx[head] = j
        prev_lo = lo
        w = sr[idx[head] - 1]
        if w < rsr:
            rsr = w
        out[k - 1] = rsr
    return out


@njit(cache=True, nogil=True)
def _rsr_scan_quantile(sr, g, q):
    """One-pass RSR with an empirical window quantile (q < 1).

    Maintains the current window as a sorted array; insertions and removals
    shift in place, O(window) per step.
    """
    n = sr.size
    out = np.empty(n, np.float64)
    cap = 1
    for k in range(n):
        if g[k] > cap:
            cap = g[k]
    win = np.empty(cap + 1, np.float64)
    size = 0
    rsr = np.inf
    prev_lo = 0
    for k in range(1, n + 1):
        lo = k - g[k - 1]
        if lo < 0:
            lo = 0
        # insert sr[k-1]
        v = sr[k - 1]
        j = size
        while j > 0 and win[j - 1] > v:
            win[j] = win[j - 1]
            j -= 1
        win[j] = v
        size += 1
        if lo > prev_lo:
            for m in range(prev_lo + 1, lo + 1):
                v = sr[m - 1]
                j = 0
                while win[j] != v:
                    j += 1
                for t in range(j, size - 1):
                    win[t] = win[t + 1]
                size -= 1
        elif lo < prev_lo:
            for m in range(lo + 1, prev_lo + 1):
                v = sr[m - 1]
                j = size
                while j > 0 and win[j - 1] > v:
                    win[j] = win[j - 1]
                    j -= 1
                win[j] = v
                size += 1
        prev_lo = lo
        r = int(math.ceil(q * size))
        if r < 1:
            r = 1
        if r > size:
            r = size
        w = win[r - 1]
        if w < rsr:
            rsr = w
        out[k - 1] = rsr
    return out


def rsr_from_values(sr_values: np.ndarray, cfg: RegretConfig, g=None) -> np.ndarray:
    """Dense RSR over a raw per-evaluation SR value array."""
    sr_values = np.ascontiguousarray(sr_values, dtype=np.float64)
    n = sr_values.size
    if n == 0:
        raise ValueError("need at least one SR value")
    if g is None:
        g_arr = g_values(n, cfg.g_exponent)
    else:
        g_arr = np.array([int(g(k)) for k in range(1, n + 1)], dtype=np.int64)
        if np.any(g_arr < 1):
            raise ValueError("custom g must be >= 1 everywhere")
    if cfg.quantile == 1.0:
        return _rsr_scan_max(sr_values, g_arr)
    return _rsr_scan_quantile(sr_values, g_arr, cfg.quantile)


def rsr_stream(problem: ProblemInstance, trace: RunTrace, cfg: RegretConfig, g=None) -> RegretSeries:
    """Dense RSR series via the one-pass streaming engines.

    ``g`` optionally overrides the window-length function (callable on the
    1-based index); by default it is ``default_g`` with ``cfg.g_exponent``.
    """
    sr = sr_series(problem, trace)
    vals = rsr_from_values(sr.values, cfg, g=g)
    return RegretSeries("RSR", sr.n, vals)


def rsr_oracle(problem: ProblemInstance, trace: RunTrace, cfg: RegretConfig, g=None) -> RegretSeries:
    """Reference RSR computed by direct nested loops over the definition.

    O(n * g) and deliberately independent of the streaming engines; property
    tests require bit-equality between the two.
    """
    sr = sr_series(problem, trace).values
    n = sr.size
    if g is None:
        g_arr = g_values(n, cfg.g_exponent)
    else:
        g_arr = np.array([int(g(k)) for k in range(1, n + 1)], dtype=np.int64)
    out = np.empty(n)
    best = np.inf
    for k in range(1, n + 1):
        lo = max(0, k - int(g_arr[k - 1]))
        window = np.sort(sr[lo:k])
        rank = quantile_rank(cfg.quantile, window.size)
        best = min(best, window[rank - 1])
        out[k - 1] = best
    return RegretSeries("RSR", np.arange(1, n + 1), out)


class RsrStream:
    """Incremental RSR tracker: push one SR value per evaluation.

    Equivalent to the batch engines but usable online.  With ``capacity`` set,
    only the trailing ``capacity`` SR values are retained (enough whenever the
    window length never exceeds it); a window reaching past the retained
    history raises instead of silently degrading.
    """

    def __init__(self, cfg: RegretConfig, g=None, capacity: int | None = None):
        self.cfg = cfg
        self._g = g if g is not None else (lambda k: default_g(k, cfg.g_exponent))
        self.capacity = capacity
        self._hist = np.empty(capacity, dtype=np.float64) if capacity else None
        self._full_hist: list[float] = []
        self._k = 0
        self._deque: deque = deque()  # indices, values strictly decreasing
        self._sorted: list[float] = []  # window contents, used when q < 1
        self._prev_lo = 0
        self._rsr = math.inf

    def _value(self, index: int) -> float:
        if self.capacity is None:
            return self._full_hist[index - 1]
        if index <= self._k - self.capacity:
            raise RuntimeError(
                f"window reaches index {index} but only {self.capacity} values are retained"
            )
        return float(self._hist[(index - 1) % self.capacity])

    @property
    def current(self) -> float:
        if self._k == 0:
            raise ValueError("no values pushed yet")
        return self._rsr

    def push(self, value: float) -> float:
        """Ingest the SR value of the next evaluation index; returns current RSR."""
        self._k += 1
        k = self._k
        value = float(value)
        if self.capacity is None:
            self._full_hist.append(value)
        else:
            self._hist[(k - 1) % self.capacity] = value
        gk = int(self._g(k))
        if gk < 1:
            raise ValueError("g must be >= 1")
        lo = max(0, k - gk)
        if self.cfg.quantile == 1.0:
            dq = self._deque
            while dq and self._value(dq[-1]) <= value:
                dq.pop()
            dq.append(k)
            if lo > self._prev_lo:
                while dq and dq[0] <= lo:
                    dq.popleft()
            elif lo < self._prev_lo:
                for j in range(self._prev_lo, lo, -1):
                    if self._value(j) > self._value(dq[0]):
                        dq.appendleft(j)
            agg = self._value(dq[0])
        else:
            insort(self._sorted, value)
            if lo > self._prev_lo:
                for m in range(self._prev_lo + 1, lo + 1):
                    del self._sorted[bisect_left(self._sorted, self._value(m))]
            elif lo < self._prev_lo:
                for m in range(lo + 1, self._prev_lo + 1):
                    insort(self._sorted, self._value(m))
            rank = quantile_rank(self.cfg.quantile, len(self._sorted))
            agg = self._sorted[rank - 1]
        self._prev_lo = lo
        if agg < self._rsr:
            self._rsr = agg
        return self._rsr


# ---------------------------------------------------------------------------
# Slope estimation
# ---------------------------------------------------------------------------


def estimate_slope(
    series: RegretSeries,
    window: tuple,
    method: str = "least_squares",
    zero_floor: float = ZERO_FLOOR,
) -> SlopeEstimate:
    """Fit the log-log slope of a regret series over ``window = (n_lo, n_hi)``.

    ``least_squares`` fits ordinary least squares of ``log(value)`` against
    ``log(n)`` over the window's points; ``endpoint`` returns
    ``log(value(n_hi)) / log(n_hi)``.  Values of zero are clamped to
    ``zero_floor`` and flagged.
    """
    n_lo, n_hi = window
    if not n_lo < n_hi:
        raise ValueError(f"window must satisfy n_lo < n_hi, got {window}")
    if series.n.size == 0 or n_lo < series.n[0] or n_hi > series.n[-1]:
        raise ValueError(f"window {window} not contained in series range "
                         f"[{series.n[0] if series.n.size else None}, "
                         f"{series.n[-1] if series.n.size else None}]")
    mask = (series.n >= n_lo) & (series.n <= n_hi)
    ns = series.n[mask].astype(np.float64)
    vals = series.values[mask]
    if ns.size < 3:
        raise ValueError(f"window {window} holds {ns.size} points; need >= 3")
    clamped = bool(np.any(vals < zero_floor))
    vals = np.maximum(vals, zero_floor)
    x = np.log(ns)
    y = np.log(vals)
    if method == "least_squares":
        xm = x - x.mean()
        slope = float(np.dot(xm, y - y.mean()) / np.dot(xm, xm))
        intercept = y.mean() - slope * x.mean()
        resid = y - (intercept + slope * x)
        rms = float(np.sqrt(np.mean(resid**2)))
    elif method == "endpoint":
        slope = float(y[-1] / x[-1])
        rms = 0.0
    else:
        raise ValueError(f"unknown slope method {method!r}")
    return SlopeEstimate(
        slope=slope,
        method=method,
        window=(int(n_lo), int(n_hi)),
        residual_rms=rms,
        n_points=int(ns.size),
        clamped=clamped,
    )

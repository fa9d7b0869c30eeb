"""Fused run loops for the evaluation-heavy algorithms.

The ask/tell objects in :mod:`regretlab.optimizers` define the semantics; the
functions here replay the same arithmetic in compiled loops over pre-drawn
random arrays so million-evaluation runs take milliseconds.  Randomness is
drawn from the same generators in the same order as the object-based path
(vectorized draws from a numpy Generator are stream-identical to repeated
scalar draws), so for a given seed both paths produce bit-identical
per-evaluation regret values.  ``tests/test_kernels.py`` pins that equality.

Each runner returns dense per-evaluation arrays: the simple regret of the
recommendation in force at each index (pre-update within a batch), the running
minimum of the search points' true values, and for the evolution strategy the
step size in force at each index.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from ._fastmath import sq_dist_rows

__all__ = ["run_random_search", "run_es11", "run_shamir", "run_fabian"]


def run_random_search(x_star, noise_std, budget, alg_seed, noise_rng):
    """Uniform search over [0,1]^d with strict-improvement selection on noisy values."""
    d = x_star.size
    rng_alg = np.random.default_rng(alg_seed)
    points = rng_alg.random((budget, d))
    tv = sq_dist_rows(points, x_star)
    y = tv + noise_std * noise_rng.standard_normal(budget)
    run_min = np.minimum.accumulate(y)
    improved = np.empty(budget, dtype=bool)
    improved[0] = True
    improved[1:] = y[1:] < run_min[:-1]
    best_idx = np.maximum.accumulate(np.where(improved, np.arange(budget), 0))
    # recommendation recorded at index n reflects evaluations 1..n-1 (pre-tell);
    # index 1 records the pending first point, which is also the initial guess
    rec_idx = np.empty(budget, dtype=np.int64)
    rec_idx[0] = 0
    rec_idx[1:] = best_idx[:-1]
    sr_all = tv[rec_idx]
    asr_all = np.minimum.accumulate(tv)
    return sr_all, asr_all


@njit(cache=True, nogil=True)
def _es11_loop(x_star, theta, sigma0, up, down, parent0, mutations, noise, budget):
    d = x_star.size
    parent = parent0.copy()
    off = np.empty(d)
    sigma = sigma0
    sr_all = np.empty(budget)
    asr_all = np.empty(budget)
    sig_all = np.empty(budget)
    sr_cur = 0.0
    for j in range(d):
        dv = parent[j] - x_star[j]
        sr_cur += dv * dv
    asr = np.inf
    n = 0
    for t in range(mutations.shape[0]):
        tv_off = 0.0
        for j in range(d):
            off[j] = parent[j] + sigma * mutations[t, j]
            dv = off[j] - x_star[j]
            tv_off += dv * dv
        y_off = tv_off + theta * noise[n]
        sr_all[n] = sr_cur
        if tv_off < asr:
            asr = tv_off
        asr_all[n] = asr
        sig_all[n] = sigma
        n += 1
        if n == budget:
            break
        tv_par = 0.0
        for j in range(d):
            dv = parent[j] - x_star[j]
            tv_par += dv * dv
        y_par = tv_par + theta * noise[n]
        sr_all[n] = sr_cur
        if tv_par < asr:
            asr = tv_par
        asr_all[n] = asr
        sig_all[n] = sigma
        n += 1
        if y_off < y_par:
            for j in range(d):
                parent[j] = off[j]
            sigma = sigma * up
            sr_cur = tv_off
        else:
            sigma = sigma * down
        if n == budget:
            break
    return sr_all, asr_all, sig_all


def run_es11(x_star, noise_std, config, budget, alg_seed, noise_rng):
    """(1+1) evolution strategy with one evaluation of offspring and parent per iteration."""
    d = x_star.size
    mut_ss, _fake_ss = alg_seed.spawn(2)
    rng_mut = np.random.default_rng(mut_ss)
    parent0 = rng_mut.random(d)
    iters = (budget + 1) // 2
    mutations = rng_mut.standard_normal((iters, d))
    noise = noise_rng.standard_normal(budget)
    return _es11_loop(
        x_star,
        noise_std,
        float(config.sigma0),
        float(config.success_up),
        float(config.failure_down),
        parent0,
        mutations,
        noise,
        budget,
    )


@njit(cache=True, nogil=True)
def _shamir_loop(x_star, eps, lam, ball, theta, noise, signs, budget, probe_period):
    d = x_star.size
    sr_all = np.empty(budget)
    asr_all = np.empty(budget)
    cumsum = np.zeros((budget + 3, d))  # cumsum[t] = xhat_1 + ... + xhat_t; xhat_1 = 0
    xhat = np.zeros(d)
    rec = np.empty(d)
    coef = eps / math.sqrt(d)
    ball_sq = ball * ball
    t = 1
    asr = np.inf
    for n in range(1, budget + 1):
        lo = (t + 1) // 2
        cnt = t - lo + 1
        sr = 0.0
        for j in range(d):
            rec[j] = (cumsum[t, j] - cumsum[lo - 1, j]) / cnt
            dv = rec[j] - x_star[j]
            sr += dv * dv
        sr_all[n - 1] = sr
        if probe_period > 0 and n % probe_period == 0:
            # evaluation spent at the recommendation; value discarded, noise draw consumed
            tv = sr
        else:
            tv = 0.0
            for j in range(d):
                pj = xhat[j] + coef * signs[t - 1, j]
                dv = pj - x_star[j]
                tv += dv * dv
            v = tv + theta * noise[n - 1]
            c1 = math.sqrt(d) * v / eps
            step = lam * t
            nr = 0.0
            for j in range(d):
                xj = xhat[j] - (c1 * signs[t - 1, j]) / step
                xhat[j] = xj
                nr += xj * xj
            if nr > ball_sq:
                sc = ball / math.sqrt(nr)
                for j in range(d):
                    xhat[j] *= sc
            for j in range(d):
                cumsum[t + 1, j] = cumsum[t, j] + xhat[j]
            t += 1
        if tv < asr:
            asr = tv
        asr_all[n - 1] = asr
    return sr_all, asr_all


def run_shamir(x_star, noise_std, config, budget, alg_seed, noise_rng, probe_period=0):
    """One-point gradient sketch SGD; ``probe_period >= 2`` spends every
    period-th evaluation at the current recommendation."""
    d = x_star.size
    rng = np.random.default_rng(alg_seed)
    probes = budget // probe_period if probe_period else 0
    iters = budget - probes
    signs = 2.0 * rng.integers(0, 2, size=(iters, d)) - 1.0
    noise = noise_rng.standard_normal(budget)
    return _shamir_loop(
        x_star,
        float(config.epsilon),
        float(config.lambda_step),
        float(config.ball_radius),
        noise_std,
        noise,
        signs,
        budget,
        probe_period or 0,
    )


@njit(cache=True, nogil=True)
def _fabian_loop(x_star, x0, u, v, an_arr, cn_arr, theta, noise, budget, s2):
    d = x_star.size
    x = x0.copy()
    sr_all = np.empty(budget)
    asr_all = np.empty(budget)
    diffsum = np.empty(d)
    asr = np.inf
    n = 0
    for t in range(an_arr.size):
        c_n = cn_arr[t]
        sr = 0.0
        for j in range(d):
            dv = x[j] - x_star[j]
            sr += dv * dv
        for i in range(d):
            diffsum[i] = 0.0
        done = False
        for j in range(s2):
            if done:
                break
            off = c_n * u[j]
            for i in range(d):
                if done:
                    break
                tvp = 0.0
                for jj in range(d):
                    pj = x[jj]
                    if jj == i:
                        pj = x[jj] + off
                    dv = pj - x_star[jj]
                    tvp += dv * dv
                yp = tvp + theta * noise[n]
                sr_all[n] = sr
                if tvp < asr:
                    asr = tvp
                asr_all[n] = asr
                n += 1
                if n == budget:
                    done = True
                    break
                tvm = 0.0
                for jj in range(d):
                    pj = x[jj]
                    if jj == i:
                        pj = x[jj] - off
                    dv = pj - x_star[jj]
                    tvm += dv * dv
                ym = tvm + theta * noise[n]
                sr_all[n] = sr
                if tvm < asr:
                    asr = tvm
                asr_all[n] = asr
                n += 1
                diffsum[i] += v[j] * (yp - ym)
                if n == budget:
                    done = True
        if done:
            break
        a_n = an_arr[t]
        for i in range(d):
            g_i = diffsum[i] / c_n
            x[i] = x[i] - a_n * g_i
    return sr_all, asr_all


def run_fabian(x_star, noise_std, config, budget, alg_seed, noise_rng):
    """Weighted multi-scale central differences with gain a/n and probe scale c/n**gamma."""
    from .optimizers import fabian_weights

    d = x_star.size
    rng = np.random.default_rng(alg_seed)
    x0 = rng.random(d)
    s2 = config.s // 2
    u = 1.0 / np.arange(1, s2 + 1, dtype=np.float64)
    v = fabian_weights(config.s)
    iters = -(-budget // (config.s * d))
    # gains computed with scalar python powers, matching the object-based path exactly
    an_arr = np.array([config.a / t**config.alpha for t in range(1, iters + 1)])
    cn_arr = np.array([config.c / t**config.gamma for t in range(1, iters + 1)])
    noise = noise_rng.standard_normal(budget)
    return _fabian_loop(x_star, x0, u, v, an_arr, cn_arr, noise_std, noise, budget, s2)

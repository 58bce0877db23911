"""Hot numeric kernels, numba-compiled.

Every function here has a vectorized twin in ``_kernels_numpy`` with the
same signature; ``backend`` picks one of the two modules at import time.
All binomial sums run in log-space off a precomputed log-C(n,k) table and
accumulate with Kahan compensation.
"""
import math

import numpy as np
from numba import njit

NAME = "numba"


@njit(cache=True)
def binom_pmf_vec(trials, p, logc):
    """Pmf of B(trials, p) for k = 0..trials; logc = log C(trials, k)."""
    out = np.zeros(trials + 1)
    if p <= 0.0:
        out[0] = 1.0
        return out
    if p >= 1.0:
        out[trials] = 1.0
        return out
    lp = math.log(p)
    lq = math.log1p(-p)
    for k in range(trials + 1):
        out[k] = math.exp(logc[k] + k * lp + (trials - k) * lq)
    return out


@njit(cache=True)
def stable_dot(values, weights):
    """Sum of values[k]*weights[k], smallest-magnitude terms first, Kahan."""
    terms = values * weights
    order = np.argsort(np.abs(terms))
    s = 0.0
    c = 0.0
    for i in range(terms.shape[0]):
        y = terms[order[i]] - c
        t = s + y
        c = (t - s) - y
        s = t
    return s


@njit(cache=True)
def binom_tail_k(trials, p, threshold, logc):
    """P(X >= threshold) for X ~ B(trials, p)."""
    if threshold <= 0:
        return 1.0
    if threshold > trials:
        return 0.0
    pmf = binom_pmf_vec(trials, p, logc)
    s = 0.0
    c = 0.0
    for k in range(threshold, trials + 1):
        y = pmf[k] - c
        t = s + y
        c = (t - s) - y
        s = t
    if s > 1.0:
        s = 1.0
    return s


@njit(cache=True)
def share_and_tail(reward, trials, n0, p, logc):
    """E[reward/(m+1) * 1{m+1 >= n0}] and P(m+1 >= n0) for m ~ B(trials, p)."""
    pmf = binom_pmf_vec(trials, p, logc)
    lo = n0 - 1
    if lo < 0:
        lo = 0
    share = 0.0
    cs = 0.0
    tail = 0.0
    ct = 0.0
    for m in range(lo, trials + 1):
        w = pmf[m]
        y = (reward / (m + 1)) * w - cs
        t = share + y
        cs = (t - share) - y
        share = t
        y2 = w - ct
        t2 = tail + y2
        ct = (t2 - tail) - y2
        tail = t2
    if tail > 1.0:
        tail = 1.0
    return share, tail


@njit(cache=True)
def expected_marginal_utility(trials, p, theta, t, logc):
    """E[n * theta / (1 + n*t)] for n ~ B(trials, p)."""
    pmf = binom_pmf_vec(trials, p, logc)
    s = 0.0
    c = 0.0
    for n in range(1, trials + 1):
        y = theta * n / (1.0 + n * t) * pmf[n] - c
        tt = s + y
        c = (tt - s) - y
        s = tt
    return s


@njit(cache=True)
def expected_log_utility(trials, p, t, logc):
    """E[log(1 + n*t)] for n ~ B(trials, p)."""
    pmf = binom_pmf_vec(trials, p, logc)
    s = 0.0
    c = 0.0
    for n in range(1, trials + 1):
        y = math.log1p(n * t) * pmf[n] - c
        tt = s + y
        c = (tt - s) - y
        s = tt
    return s

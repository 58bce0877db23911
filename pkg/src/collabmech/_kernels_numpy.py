"""Pure-numpy fallback for the numba kernels in ``_kernels_numba``.

Same signatures and edge-case behaviour; compensated accumulation is done
with ``math.fsum`` over magnitude-sorted terms.
"""
import math

import numpy as np

NAME = "numpy"


def binom_pmf_vec(trials, p, logc):
    """Pmf of B(trials, p) for k = 0..trials; logc = log C(trials, k)."""
    out = np.zeros(trials + 1)
    if p <= 0.0:
        out[0] = 1.0
        return out
    if p >= 1.0:
        out[trials] = 1.0
        return out
    k = np.arange(trials + 1)
    return np.exp(logc + k * math.log(p) + (trials - k) * math.log1p(-p))


def _fsum_sorted(terms):
    order = np.argsort(np.abs(terms))
    return math.fsum(terms[order])


def stable_dot(values, weights):
    """Sum of values[k]*weights[k], smallest-magnitude terms first, exact fsum."""
    return _fsum_sorted(np.asarray(values, dtype=float) * np.asarray(weights, dtype=float))


def binom_tail_k(trials, p, threshold, logc):
    """P(X >= threshold) for X ~ B(trials, p)."""
    if threshold <= 0:
        return 1.0
    if threshold > trials:
        return 0.0
    pmf = binom_pmf_vec(trials, p, logc)
    return min(math.fsum(pmf[threshold:]), 1.0)


def share_and_tail(reward, trials, n0, p, logc):
    """E[reward/(m+1) * 1{m+1 >= n0}] and P(m+1 >= n0) for m ~ B(trials, p)."""
    pmf = binom_pmf_vec(trials, p, logc)
    lo = max(n0 - 1, 0)
    m = np.arange(lo, trials + 1)
    w = pmf[lo:]
    share = math.fsum(reward / (m + 1) * w)
    tail = min(math.fsum(w), 1.0)
    return share, tail


def expected_marginal_utility(trials, p, theta, t, logc):
    """E[n * theta / (1 + n*t)] for n ~ B(trials, p)."""
    pmf = binom_pmf_vec(trials, p, logc)
    n = np.arange(1, trials + 1)
    return math.fsum(theta * n / (1.0 + n * t) * pmf[1:])


def expected_log_utility(trials, p, t, logc):
    """E[log(1 + n*t)] for n ~ B(trials, p)."""
    pmf = binom_pmf_vec(trials, p, logc)
    n = np.arange(1, trials + 1)
    return math.fsum(np.log1p(n * t) * pmf[1:])

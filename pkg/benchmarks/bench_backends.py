"""Benchmark the numba kernels against the pure-numpy fallback.

Run:  python benchmarks/bench_backends.py
"""
import time

import numpy as np

from collabmech.backend import get_kernels, log_binom_coeffs


def _time(fn, repeats):
    fn()  # warm up (triggers jit compilation on the numba path)
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - t0) / repeats


def bench_backend(name: str) -> dict[str, float]:
    k = get_kernels(name)
    logc99 = log_binom_coeffs(99)
    logc120 = log_binom_coeffs(120)
    values = np.linspace(-1.0, 1.0, 100)
    weights = np.abs(np.linspace(0.0, 1.0, 100))
    cases = {
        "binom_pmf_vec(100)": lambda: k.binom_pmf_vec(99, 0.37, logc99),
        "share_and_tail(100)": lambda: k.share_and_tail(100.0, 99, 40, 0.5, logc99),
        "binom_tail(120)": lambda: k.binom_tail_k(120, 1 / 3, 55, logc120),
        "expected_marginal_utility": lambda: k.expected_marginal_utility(
            120, 1 / 3, 5.0, 0.07, logc120),
        "expected_log_utility": lambda: k.expected_log_utility(120, 1 / 3, 0.07, logc120),
        "stable_dot(100)": lambda: k.stable_dot(values, weights),
    }
    return {label: _time(fn, 2000) for label, fn in cases.items()}


def bench_threshold_solve(name: str) -> float:
    k = get_kernels(name)
    logc = log_binom_coeffs(99)

    def phi(gamma, reward=100.0):
        p = min(max(gamma / 4.0, 0.0), 1.0)
        share, tail = k.share_and_tail(reward, 99, 40, p, logc)
        return share - gamma * tail

    def solve():
        lo, hi = 1.0 + 1e-10, 2.5 - 1e-10
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if phi(mid) > 0:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    return _time(solve, 200)


def main():
    results = {name: bench_backend(name) for name in ("numba", "numpy")}
    width = max(len(label) for label in results["numba"])
    print(f"{'kernel':<{width}}  {'numba':>12}  {'numpy':>12}  {'speedup':>8}")
    for label in results["numba"]:
        tn = results["numba"][label]
        tp = results["numpy"][label]
        print(f"{label:<{width}}  {tn * 1e6:>10.2f}us  {tp * 1e6:>10.2f}us  {tp / tn:>7.1f}x")
    print()
    for name in ("numba", "numpy"):
        t = bench_threshold_solve(name)
        print(f"threshold solve (N=100, 60 bisections) [{name}]: {t * 1e3:.3f} ms")


if __name__ == "__main__":
    main()

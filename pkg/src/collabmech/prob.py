"""Binomial/multinomial probability primitives and seeded sampling.

Everything is deterministic given an :class:`RngHandle` seed; pmf values are
computed in log-space so populations in the hundreds stay finite.
"""
import math
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from .backend import kernels, log_binom_coeffs
from .errors import DomainError, NumericalError

PROB_ATOL = 1e-9


@dataclass(frozen=True)
class BinomialSpec:
    """Number of trials and per-trial success probability."""

    trials: int
    success_prob: float

    def __post_init__(self):
        if self.trials < 0 or int(self.trials) != self.trials:
            raise DomainError(f"trials must be a nonnegative integer, got {self.trials}")
        if not 0.0 <= self.success_prob <= 1.0:
            raise DomainError(f"success_prob must lie in [0, 1], got {self.success_prob}")


class RngHandle:
    """Seeded, platform-independent random stream (numpy PCG64).

    Identical seeds reproduce identical sample streams.  `spawn(i)` derives an
    independent child stream via numpy's SeedSequence spawn-key mechanism, so
    per-slot simulation draws are reproducible regardless of evaluation order.
    """

    algorithm = "pcg64"

    def __init__(self, seed: int, _spawn_key: tuple[int, ...] = ()):
        self.seed = int(seed)
        self._spawn_key = tuple(_spawn_key)
        seq = np.random.SeedSequence(entropy=self.seed, spawn_key=self._spawn_key)
        self._generator = np.random.Generator(np.random.PCG64(seq))

    @property
    def generator(self) -> np.random.Generator:
        return self._generator

    def spawn(self, index: int) -> "RngHandle":
        """Independent child stream number `index`."""
        return RngHandle(self.seed, self._spawn_key + (int(index),))

    def __repr__(self):
        return f"RngHandle(seed={self.seed}, spawn_key={self._spawn_key})"


def binom_pmf_vector(spec: BinomialSpec) -> np.ndarray:
    """Pmf of the full support 0..trials."""
    return kernels.binom_pmf_vec(spec.trials, spec.success_prob,
                                 log_binom_coeffs(spec.trials))


def binom_pmf(spec: BinomialSpec, k: int) -> float:
    """P(X = k)."""
    if not 0 <= k <= spec.trials:
        raise DomainError(f"k={k} outside 0..{spec.trials}")
    return float(binom_pmf_vector(spec)[k])


def binom_tail(spec: BinomialSpec, threshold: int) -> float:
    """P(X >= threshold); 1 for threshold <= 0, 0 for threshold > trials."""
    return float(kernels.binom_tail_k(spec.trials, spec.success_prob,
                                      int(threshold), log_binom_coeffs(spec.trials)))


def binom_expect(spec: BinomialSpec, g: Callable[[int], float]) -> float:
    """E[g(X)], terms accumulated smallest-magnitude first with compensation."""
    values = np.array([float(g(k)) for k in range(spec.trials + 1)])
    if not np.all(np.isfinite(values)):
        bad = int(np.flatnonzero(~np.isfinite(values))[0])
        raise NumericalError(f"g({bad}) is not finite")
    return float(kernels.stable_dot(values, binom_pmf_vector(spec)))


def composition_count(total: int, bins: int) -> int:
    """Number of nonnegative integer vectors of length `bins` summing to `total`."""
    return math.comb(total + bins - 1, bins - 1)


def multinomial_compositions(total: int, bins: int) -> Iterator[tuple[int, ...]]:
    """Yield every nonnegative integer vector of length `bins` summing to `total`."""
    if total < 0 or bins < 1:
        raise DomainError(f"need total >= 0 and bins >= 1, got {total}, {bins}")

    def rec(remaining: int, slots: int):
        if slots == 1:
            yield (remaining,)
            return
        for first in range(remaining + 1):
            for rest in rec(remaining - first, slots - 1):
                yield (first,) + rest

    return rec(total, bins)


def multinomial_pmf(counts, probs) -> float:
    """Pmf of a multinomial realization, log-space."""
    counts = np.asarray(counts, dtype=np.int64)
    probs = np.asarray(probs, dtype=float)
    if counts.shape != probs.shape:
        raise DomainError("counts and probs must have the same length")
    total = int(counts.sum())
    logp = math.lgamma(total + 1)
    for n, q in zip(counts, probs):
        if q <= 0.0:
            if n > 0:
                return 0.0
            continue
        logp += n * math.log(q) - math.lgamma(n + 1)
    return math.exp(logp)


def _validated_probs(probs) -> np.ndarray:
    probs = np.asarray(probs, dtype=float)
    if probs.ndim != 1 or probs.size == 0:
        raise DomainError("probs must be a nonempty vector")
    if np.any(probs < 0) or not np.all(np.isfinite(probs)):
        raise DomainError("probs must be finite and nonnegative")
    if abs(probs.sum() - 1.0) > PROB_ATOL:
        raise DomainError(f"probs must sum to 1 within {PROB_ATOL}, got {probs.sum()}")
    return probs / probs.sum()


def sample_type_counts(total: int, probs, rng: RngHandle) -> np.ndarray:
    """One multinomial draw of `total` individuals over len(probs) types."""
    if total < 0:
        raise DomainError("total must be nonnegative")
    q = _validated_probs(probs)
    if total == 0:
        return np.zeros(q.size, dtype=np.int64)
    return rng.generator.multinomial(total, q).astype(np.int64)

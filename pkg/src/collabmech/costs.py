"""User collaboration-cost information.

Complete information is a known positive cost vector; incomplete information
is a cdf F with mean mu: uniform on [0, b], Gaussian (untruncated, matching
the source figures even though it places mass below zero), or an empirical
right-continuous step function. Sampling clamps nonpositive draws to a small
floor so realized cost vectors stay positive.
"""
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .prob import RngHandle

COST_FLOOR = 1e-6


@dataclass(frozen=True)
class KnownCosts:
    """Per-user collaboration costs, all strictly positive."""

    costs: tuple[float, ...]

    def __post_init__(self):
        arr = np.asarray(self.costs, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise DomainError("costs must be a nonempty vector")
        if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
            raise DomainError("costs must be finite and > 0")
        object.__setattr__(self, "costs", tuple(float(c) for c in arr))

    def __len__(self):
        return len(self.costs)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.costs, dtype=float)


class CostDistribution:
    """Interface: cdf(x), mean(), sample(rng, count)."""

    kind = "abstract"

    def cdf(self, x: float) -> float:
        raise NotImplementedError

    def mean(self) -> float:
        raise NotImplementedError

    def _draw(self, rng: RngHandle, count: int) -> np.ndarray:
        raise NotImplementedError

    def sample(self, rng: RngHandle, count: int, floor: float = COST_FLOOR) -> KnownCosts:
        """`count` i.i.d. draws, nonpositive values clamped to `floor`."""
        if count < 1:
            raise DomainError("count must be >= 1")
        draws = np.maximum(self._draw(rng, count), floor)
        return KnownCosts(tuple(draws))

    def to_config(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class UniformCosts(CostDistribution):
    """Uniform on [0, b]: F(x) = min(max(x/b, 0), 1)."""

    b: float
    kind = "uniform"

    def __post_init__(self):
        if not (math.isfinite(self.b) and self.b > 0):
            raise DomainError("uniform bound b must be finite and > 0")

    def cdf(self, x: float) -> float:
        return float(min(max(x / self.b, 0.0), 1.0))

    def mean(self) -> float:
        return self.b / 2.0

    def _draw(self, rng, count):
        return rng.generator.uniform(0.0, self.b, size=count)

    def to_config(self) -> dict:
        return {"kind": "uniform", "params": {"b": self.b}}


@dataclass(frozen=True)
class GaussianCosts(CostDistribution):
    """Normal with mean mu, std-dev delta; cdf deliberately untruncated."""

    mu: float
    delta: float
    kind = "gaussian"

    def __post_init__(self):
        if not (math.isfinite(self.mu) and math.isfinite(self.delta) and self.delta >= 0):
            raise DomainError("gaussian needs finite mu and delta >= 0")

    def cdf(self, x: float) -> float:
        if self.delta == 0.0:
            return 1.0 if x >= self.mu else 0.0
        z = (x - self.mu) / (self.delta * math.sqrt(2.0))
        return 0.5 * (1.0 + math.erf(z))

    def mean(self) -> float:
        return self.mu

    def _draw(self, rng, count):
        if self.delta == 0.0:
            return np.full(count, self.mu)
        return rng.generator.normal(self.mu, self.delta, size=count)

    def to_config(self) -> dict:
        return {"kind": "gaussian", "params": {"mu": self.mu, "delta": self.delta}}


@dataclass(frozen=True)
class EmpiricalCosts(CostDistribution):
    """Right-continuous empirical step cdf; ties counted with multiplicity."""

    samples: tuple[float, ...]
    kind = "empirical"

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=float)
        if arr.ndim != 1 or arr.size == 0 or not np.all(np.isfinite(arr)):
            raise DomainError("empirical samples must be a nonempty finite vector")
        object.__setattr__(self, "samples", tuple(float(s) for s in np.sort(arr)))

    def cdf(self, x: float) -> float:
        arr = np.asarray(self.samples)
        return float(np.searchsorted(arr, x, side="right")) / arr.size

    def mean(self) -> float:
        return float(np.mean(self.samples))

    def _draw(self, rng, count):
        return rng.generator.choice(np.asarray(self.samples), size=count, replace=True)

    def to_config(self) -> dict:
        return {"kind": "empirical", "params": {"samples": list(self.samples)}}


def cost_model_from_config(config: dict) -> CostDistribution:
    """Build a distribution from {"kind": ..., "params": {...}}."""
    try:
        kind = config["kind"]
        params = config.get("params", {})
    except (TypeError, KeyError) as exc:
        raise DomainError(f"malformed cost_model config: {config!r}") from exc
    if kind == "uniform":
        return UniformCosts(b=float(params["b"]))
    if kind == "gaussian":
        return GaussianCosts(mu=float(params["mu"]), delta=float(params["delta"]))
    if kind == "empirical":
        return EmpiricalCosts(samples=tuple(params["samples"]))
    raise DomainError(f"unknown cost_model kind {kind!r}")

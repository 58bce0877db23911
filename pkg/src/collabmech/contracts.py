"""Screening-contract design for distributed computing.

A contract is a menu of (reward, task) items, one per user type; types are
ordered by strictly decreasing unit cost K_1 > ... > K_I (higher type =
cheaper worker). Natural logarithm throughout the master's utility
theta_i * log(1 + n_i t_i).

Complete information has a per-type closed form. Under asymmetrically
incomplete information the reward menu collapses to a telescoping function
of the tasks (lowest type pinned to zero payoff, each increment priced at
the next type's unit cost), leaving a separable concave program over tasks
with the chain constraint t_1 <= ... <= t_I and capacities t_i <= tbar_i.
That program is solved exactly by per-type bisection on the marginal-profit
root plus adjacent-violator pooling with per-block capacity bounds; the
result is certified by a KKT residual check, with a projected-gradient
refinement as a fallback before giving up.
"""
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import nnls

from .backend import kernels, log_binom_coeffs
from .errors import DomainError, NumericalError
from .prob import multinomial_compositions, multinomial_pmf

FEAS_TOL = 1e-9           # slack for weak inequalities in feasibility checks
KKT_TOL = 1e-8
MULTINOMIAL_GUARD_N = 30  # full enumeration explodes combinatorially past this
_POSITIVE_TASK = 1e-12


@dataclass(frozen=True)
class UserTypeProfile:
    """Per-type unit costs, capacities, master weights, and the population.

    Exactly one population form: per-type counts (complete information) or a
    total N with type probabilities q (incomplete information). Types with
    equal unit cost must be merged before construction.
    """

    unit_costs: tuple[float, ...]
    weights: tuple[float, ...]
    capacities: tuple[float, ...]
    counts: tuple[int, ...] | None = None
    population: int | None = None
    type_probs: tuple[float, ...] | None = None

    def __post_init__(self):
        k = np.asarray(self.unit_costs, dtype=float)
        th = np.asarray(self.weights, dtype=float)
        tb = np.asarray(self.capacities, dtype=float)
        if not (k.ndim == 1 and k.size >= 1 and k.size == th.size == tb.size):
            raise DomainError("unit_costs, weights, capacities must align")
        if np.any(k <= 0) or not np.all(np.isfinite(k)):
            raise DomainError("unit costs must be finite and > 0")
        if np.any(np.diff(k) >= 0):
            raise DomainError(
                "unit costs must be strictly decreasing; merge equal-cost types "
                "into a single type first")
        if np.any(th <= 0) or not np.all(np.isfinite(th)):
            raise DomainError("weights must be finite and > 0")
        if np.any(tb <= 0) or np.any(np.isnan(tb)):
            raise DomainError("capacities must be > 0 (inf allowed)")
        has_counts = self.counts is not None
        has_probs = self.population is not None and self.type_probs is not None
        if has_counts == has_probs:
            raise DomainError("give either counts or (population, type_probs)")
        if has_counts:
            c = np.asarray(self.counts)
            if c.size != k.size or np.any(c < 0) or np.any(c != c.astype(int)):
                raise DomainError("counts must be aligned nonnegative integers")
            object.__setattr__(self, "counts", tuple(int(x) for x in c))
        else:
            q = np.asarray(self.type_probs, dtype=float)
            if q.size != k.size or np.any(q < 0):
                raise DomainError("type_probs must be aligned and nonnegative")
            if abs(q.sum() - 1.0) > 1e-9:
                raise DomainError(f"type_probs must sum to 1, got {q.sum()}")
            if self.population < 1:
                raise DomainError("population must be >= 1")
            object.__setattr__(self, "type_probs", tuple(float(x) for x in q))
        object.__setattr__(self, "unit_costs", tuple(float(x) for x in k))
        object.__setattr__(self, "weights", tuple(float(x) for x in th))
        object.__setattr__(self, "capacities", tuple(float(x) for x in tb))

    @property
    def n_types(self) -> int:
        return len(self.unit_costs)

    @classmethod
    def with_counts(cls, unit_costs, weights, capacities, counts):
        return cls(tuple(unit_costs), tuple(weights), tuple(capacities),
                   counts=tuple(counts))

    @classmethod
    def with_probabilities(cls, unit_costs, weights, capacities, population, type_probs):
        return cls(tuple(unit_costs), tuple(weights), tuple(capacities),
                   population=int(population), type_probs=tuple(type_probs))


class ContractItem(NamedTuple):
    reward: float
    task: float


@dataclass(frozen=True)
class Contract:
    """Menu of (reward, task) items aligned with the type order."""

    items: tuple[ContractItem, ...]

    def __post_init__(self):
        object.__setattr__(
            self, "items",
            tuple(ContractItem(float(r), float(t)) for r, t in self.items))

    @classmethod
    def from_arrays(cls, rewards, tasks) -> "Contract":
        rewards = np.asarray(rewards, dtype=float)
        tasks = np.asarray(tasks, dtype=float)
        if rewards.shape != tasks.shape:
            raise DomainError("rewards and tasks must align")
        return cls(tuple(ContractItem(float(r), float(t))
                         for r, t in zip(rewards, tasks)))

    @classmethod
    def null(cls, n_types: int) -> "Contract":
        return cls(tuple(ContractItem(0.0, 0.0) for _ in range(n_types)))

    @property
    def rewards(self) -> np.ndarray:
        return np.array([it.reward for it in self.items])

    @property
    def tasks(self) -> np.ndarray:
        return np.array([it.task for it in self.items])

    def __len__(self):
        return len(self.items)


@dataclass
class FeasibilityReport:
    feasible: bool
    violations: list[str]


@dataclass
class ContractSolution:
    contract: Contract
    involved: tuple[int, ...]
    expected_profit: float
    payoffs: np.ndarray
    diagnostics: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# feasibility and rewards
# ---------------------------------------------------------------------------

def check_feasibility(contract: Contract, unit_costs) -> FeasibilityReport:
    """Three-condition feasibility test, equivalent to all I^2 IR/IC constraints.

    Condition(+): the lowest type breaks even; Condition(up): rewards and
    tasks both nondecreasing from zero; Condition(<=): each reward increment
    sandwiched between the own and the previous type's cost of the task
    increment.
    """
    k = np.asarray(unit_costs, dtype=float)
    if len(contract) != k.size:
        raise DomainError("contract and unit costs must align")
    r = contract.rewards
    t = contract.tasks
    violations = []
    if r[0] - k[0] * t[0] < -FEAS_TOL:
        violations.append(f"Condition(+): r_1 - K_1 t_1 = {r[0] - k[0] * t[0]:.6g} < 0")
    if r[0] < -FEAS_TOL or t[0] < -FEAS_TOL:
        violations.append("Condition(up): first item must be nonnegative")
    for i in range(1, k.size):
        if r[i] < r[i - 1] - FEAS_TOL or t[i] < t[i - 1] - FEAS_TOL:
            violations.append(
                f"Condition(up): item {i + 1} not >= item {i} "
                f"(r: {r[i - 1]:.6g}->{r[i]:.6g}, t: {t[i - 1]:.6g}->{t[i]:.6g})")
        dt = t[i] - t[i - 1]
        lo = r[i - 1] + k[i] * dt
        hi = r[i - 1] + k[i - 1] * dt
        if r[i] < lo - FEAS_TOL:
            violations.append(f"Condition(<=): r_{i + 1} = {r[i]:.6g} below lower bound {lo:.6g}")
        if r[i] > hi + FEAS_TOL:
            violations.append(f"Condition(<=): r_{i + 1} = {r[i]:.6g} above upper bound {hi:.6g}")
    return FeasibilityReport(feasible=not violations, violations=violations)


def optimal_rewards_given_tasks(tasks, unit_costs) -> np.ndarray:
    """Cheapest feasible rewards for a nondecreasing task vector.

    Telescoping: the lowest type breaks even, every task increment is priced
    at the own type's unit cost, so payoffs are nondecreasing in type.
    """
    t = np.asarray(tasks, dtype=float)
    k = np.asarray(unit_costs, dtype=float)
    if t.shape != k.shape:
        raise DomainError("tasks and unit costs must align")
    if np.any(t < 0) or np.any(np.diff(t) < 0):
        raise DomainError("tasks must be nonnegative and nondecreasing")
    r = np.empty_like(t)
    r[0] = k[0] * t[0]
    for i in range(1, t.size):
        r[i] = r[i - 1] + k[i] * (t[i] - t[i - 1])
    return r


# ---------------------------------------------------------------------------
# profit evaluation
# ---------------------------------------------------------------------------

def realized_profit(contract: Contract, counts, weights) -> float:
    """Master profit for one realized count vector."""
    n = np.asarray(counts, dtype=float)
    th = np.asarray(weights, dtype=float)
    if len(contract) != n.size or n.size != th.size:
        raise DomainError("contract, counts and weights must align")
    r = contract.rewards
    t = contract.tasks
    return float(np.sum(th * np.log1p(n * t) - n * r))


def expected_profit(contract: Contract, profile: UserTypeProfile,
                    method: str = "marginal") -> float:
    """Expected master profit over the multinomial population.

    "marginal" exploits per-type separability (binomial marginals, exact by
    linearity); "multinomial" enumerates every composition and is guarded to
    N <= 30.
    """
    if profile.type_probs is None:
        raise DomainError("expected_profit needs a probabilistic population")
    if len(contract) != profile.n_types:
        raise DomainError("contract and profile must align")
    n_pop = profile.population
    q = np.asarray(profile.type_probs)
    th = np.asarray(profile.weights)
    r = contract.rewards
    t = contract.tasks
    if method == "marginal":
        logc = log_binom_coeffs(n_pop)
        total = 0.0
        for i in range(profile.n_types):
            e_log = kernels.expected_log_utility(n_pop, float(q[i]), float(t[i]), logc)
            total += th[i] * e_log - n_pop * q[i] * r[i]
        return float(total)
    if method == "multinomial":
        if n_pop > MULTINOMIAL_GUARD_N:
            raise DomainError(
                f"multinomial enumeration guarded to N <= {MULTINOMIAL_GUARD_N}")
        terms = []
        for counts in multinomial_compositions(n_pop, profile.n_types):
            w = multinomial_pmf(counts, q)
            if w == 0.0:
                continue
            terms.append(w * realized_profit(contract, counts, th))
        return math.fsum(terms)
    raise DomainError(f"unknown method {method!r} (use 'marginal' or 'multinomial')")


def aggregate_user_payoff(solution: ContractSolution, counts) -> float:
    """Sum of n_i * (r_i - K_i t_i) over types for one realization."""
    n = np.asarray(counts, dtype=float)
    if n.size != len(solution.contract):
        raise DomainError("counts must align with the contract")
    return float(np.sum(n * solution.payoffs))


# ---------------------------------------------------------------------------
# complete information (per-type closed form)
# ---------------------------------------------------------------------------

def complete_involvement(profile: UserTypeProfile) -> tuple[int, ...]:
    """Types hired under complete information: weight exceeds unit cost."""
    return tuple(i for i in range(profile.n_types)
                 if profile.weights[i] > profile.unit_costs[i])


def complete_items_for_counts(counts, unit_costs, weights, capacities):
    """Closed-form per-type optimum for arbitrary (possibly zero) counts.

    Returns (rewards, tasks, profit); zero-count or unprofitable types get
    the null item.
    """
    counts = np.asarray(counts, dtype=float)
    k = np.asarray(unit_costs, dtype=float)
    th = np.asarray(weights, dtype=float)
    tb = np.asarray(capacities, dtype=float)
    rewards = np.zeros(k.size)
    tasks = np.zeros(k.size)
    profit = 0.0
    for i in range(k.size):
        if counts[i] <= 0 or th[i] <= k[i]:
            continue
        t_i = min((th[i] - k[i]) / (k[i] * counts[i]), tb[i])
        tasks[i] = t_i
        rewards[i] = k[i] * t_i
        profit += th[i] * math.log1p(counts[i] * t_i) - counts[i] * k[i] * t_i
    return rewards, tasks, profit


def solve_complete_contract(profile: UserTypeProfile) -> ContractSolution:
    """Optimal menu with known type counts: hire type i iff theta_i > K_i.

    Monitoring makes self-selection moot, so every user is paid exactly his
    cost and ends at zero payoff; the per-type task is the interior optimum
    (theta_i - K_i)/(K_i N_i) clipped at the capacity.
    """
    if profile.counts is None:
        raise DomainError("solve_complete_contract needs a counts population")
    rewards, tasks, profit = complete_items_for_counts(
        profile.counts, profile.unit_costs, profile.weights, profile.capacities)
    involved = tuple(i for i in range(profile.n_types) if tasks[i] > 0)
    contract = Contract.from_arrays(rewards, tasks)
    payoffs = rewards - np.asarray(profile.unit_costs) * tasks
    return ContractSolution(
        contract=contract, involved=involved, expected_profit=profit,
        payoffs=payoffs,
        diagnostics={"involvement_rule": complete_involvement(profile)})


# ---------------------------------------------------------------------------
# asymmetrically incomplete information (KKT + pooling)
# ---------------------------------------------------------------------------

def involvement_margins(profile: UserTypeProfile) -> np.ndarray:
    """Marginal expected profit of each type's task at zero.

    margin_i = N [ q_i (theta_i - K_i) - (K_i - K_{i+1}) * sum_{j>i} q_j ];
    the trailing cost gap multiplies an empty sum for the highest type, so
    K_{I+1} is never evaluated. A type enters the incomplete-information
    involvement set iff its margin is strictly positive.
    """
    if profile.type_probs is None:
        raise DomainError("involvement margins need a probabilistic population")
    k = np.asarray(profile.unit_costs)
    th = np.asarray(profile.weights)
    q = np.asarray(profile.type_probs)
    n_pop = profile.population
    out = np.empty(profile.n_types)
    for i in range(profile.n_types):
        gap = k[i] - k[i + 1] if i + 1 < profile.n_types else 0.0
        q_above = q[i + 1:].sum()
        out[i] = n_pop * (q[i] * (th[i] - k[i]) - gap * q_above)
    return out


def incomplete_involvement(profile: UserTypeProfile) -> tuple[int, ...]:
    """Involvement set under asymmetrically incomplete information."""
    return tuple(int(i) for i in np.flatnonzero(involvement_margins(profile) > 0))


class _TaskDerivatives:
    """Per-type marginal expected profit d_i(t) and pooled-block root finding."""

    def __init__(self, profile: UserTypeProfile):
        self.n_pop = profile.population
        self.q = np.asarray(profile.type_probs)
        self.theta = np.asarray(profile.weights)
        k = np.asarray(profile.unit_costs)
        gaps = np.append(np.diff(k) * -1.0, 0.0)  # K_i - K_{i+1}, 0 for the top type
        q_above = np.append(np.cumsum(self.q[::-1])[::-1][1:], 0.0)
        self.const = self.n_pop * (self.q * k + gaps * q_above)
        self.logc = log_binom_coeffs(self.n_pop)

    def value(self, i: int, t: float) -> float:
        emu = kernels.expected_marginal_utility(
            self.n_pop, float(self.q[i]), float(self.theta[i]), float(t), self.logc)
        return emu - float(self.const[i])

    def block_sum(self, idx: list[int], t: float) -> float:
        return math.fsum(self.value(i, t) for i in idx)

    def block_root(self, idx: list[int], bound: float) -> float:
        """Maximizer of the pooled concave block objective on [0, bound]."""
        if self.block_sum(idx, 0.0) <= 0.0:
            return 0.0
        hi = 1.0
        if math.isfinite(bound):
            if self.block_sum(idx, bound) >= 0.0:
                return bound
            hi = bound
        else:
            for _ in range(80):
                if self.block_sum(idx, hi) <= 0.0:
                    break
                hi *= 2.0
            else:
                raise NumericalError("pooled task derivative never turns negative")
        lo = 0.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            if self.block_sum(idx, mid) > 0.0:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)


def _pava_tasks(deriv: _TaskDerivatives, bounds: np.ndarray) -> np.ndarray:
    """Adjacent-violator pooling for the chain-constrained separable program."""
    blocks: list[tuple[list[int], float]] = []
    for i in range(bounds.size):
        blocks.append(([i], deriv.block_root([i], bounds[i])))
        while len(blocks) > 1 and blocks[-2][1] > blocks[-1][1]:
            idx = blocks[-2][0] + blocks[-1][0]
            merged = (idx, deriv.block_root(idx, bounds[idx[0]]))
            blocks = blocks[:-2] + [merged]
    tasks = np.empty(bounds.size)
    for idx, v in blocks:
        tasks[idx] = v
    return tasks


def _isotonic_project(y: np.ndarray, bounds: np.ndarray) -> np.ndarray:
    """Euclidean projection onto {0 <= t, t nondecreasing, t <= bounds}."""
    blocks: list[tuple[list[int], float]] = []
    for i in range(y.size):
        v = min(max(y[i], 0.0), bounds[i])
        blocks.append(([i], v))
        while len(blocks) > 1 and blocks[-2][1] > blocks[-1][1]:
            idx = blocks[-2][0] + blocks[-1][0]
            v = float(np.mean(y[idx]))
            v = min(max(v, 0.0), bounds[idx[0]])
            blocks = blocks[:-2] + [(idx, v)]
    out = np.empty(y.size)
    for idx, v in blocks:
        out[idx] = v
    return out


def _kkt_certificate(deriv: _TaskDerivatives, tasks: np.ndarray,
                     capacities: np.ndarray) -> dict:
    """Recover multipliers for the active constraints and report residuals."""
    n = tasks.size
    grad = np.array([deriv.value(i, tasks[i]) for i in range(n)])
    act_tol = 1e-7
    cols = []
    labels = []
    if tasks[0] <= act_tol:
        col = np.zeros(n)
        col[0] = 1.0
        cols.append(col)
        labels.append(("lower", 0))
    for i in range(n - 1):
        if tasks[i + 1] - tasks[i] <= act_tol * max(1.0, tasks[i + 1]):
            col = np.zeros(n)
            col[i + 1] = 1.0
            col[i] = -1.0
            cols.append(col)
            labels.append(("chain", i))
    for i in range(n):
        if math.isfinite(capacities[i]) and capacities[i] - tasks[i] <= act_tol * max(1.0, capacities[i]):
            col = np.zeros(n)
            col[i] = -1.0
            cols.append(col)
            labels.append(("capacity", i))
    lam = np.zeros(max(n - 1, 0))
    v_cap = np.zeros(n)
    if cols:
        a = np.column_stack(cols)
        mult, _ = nnls(a, -grad)
        residual = float(np.max(np.abs(grad + a @ mult)))
        for (kind, i), m in zip(labels, mult):
            if kind == "chain":
                lam[i] = m
            elif kind == "capacity":
                v_cap[i] = m
    else:
        residual = float(np.max(np.abs(grad))) if n else 0.0
    return {"kkt_residual": residual, "lambda": lam, "v": v_cap, "gradient": grad}


def solve_incomplete_contract(profile: UserTypeProfile,
                              kkt_tol: float = KKT_TOL) -> ContractSolution:
    """Optimal screening menu under asymmetrically incomplete information.

    Solves the reduced task program exactly (per-type roots + pooling +
    capacity bounds), prices rewards by the telescoping rule, and certifies
    the KKT system to `kkt_tol`; a projected-gradient pass retries once
    before raising. Reported involvement is the set of positive tasks;
    the sign-test margins land in diagnostics for comparison.
    """
    if profile.type_probs is None:
        raise DomainError("solve_incomplete_contract needs a probabilistic population")
    capacities = np.asarray(profile.capacities, dtype=float)
    bounds = np.minimum.accumulate(capacities[::-1])[::-1]  # chain-tightened caps
    deriv = _TaskDerivatives(profile)
    tasks = _pava_tasks(deriv, bounds)
    cert = _kkt_certificate(deriv, tasks, capacities)
    if cert["kkt_residual"] > kkt_tol:
        # fallback: projected gradient from the PAVA point, then re-certify
        curvature = max(float(np.asarray(profile.weights)[i])
                        * profile.population ** 2 * float(np.asarray(profile.type_probs)[i])
                        for i in range(profile.n_types))
        step = 1.0 / max(curvature, 1.0)
        t = tasks.copy()
        for _ in range(5000):
            g = np.array([deriv.value(i, t[i]) for i in range(t.size)])
            t_new = _isotonic_project(t + step * g, bounds)
            if np.max(np.abs(t_new - t)) < 1e-15:
                t = t_new
                break
            t = t_new
        cert_pg = _kkt_certificate(deriv, t, capacities)
        if cert_pg["kkt_residual"] <= cert["kkt_residual"]:
            tasks, cert = t, cert_pg
        if cert["kkt_residual"] > kkt_tol:
            raise NumericalError(
                f"KKT residual {cert['kkt_residual']:.3e} exceeds {kkt_tol} "
                f"after projected-gradient refinement; diagnostics: {cert}")
    tasks = np.where(tasks < _POSITIVE_TASK, 0.0, tasks)
    rewards = optimal_rewards_given_tasks(tasks, profile.unit_costs)
    contract = Contract.from_arrays(rewards, tasks)
    involved = tuple(int(i) for i in np.flatnonzero(tasks > 0))
    margins = involvement_margins(profile)
    payoffs = rewards - np.asarray(profile.unit_costs) * tasks
    report = check_feasibility(contract, profile.unit_costs)
    if not report.feasible:
        raise NumericalError(f"solver produced an infeasible menu: {report.violations}")
    diagnostics = dict(cert)
    diagnostics["margins"] = margins
    diagnostics["margin_involvement"] = tuple(int(i) for i in np.flatnonzero(margins > 0))
    return ContractSolution(
        contract=contract, involved=involved,
        expected_profit=expected_profit(contract, profile, method="marginal"),
        payoffs=payoffs, diagnostics=diagnostics)

"""Solvers for the threshold-revenue reward game (data acquisition).

Stage II: users decide whether to collaborate; Stage I: the master picks the
total reward R. Three information scenarios (complete / symmetric /
asymmetric) and two payoff conventions:

* model A  - a collaborator pays his cost only if the collaboration succeeds,
* model B  - a collaborator always pays his cost, rewarded only on success.

The asymmetric Stage-II equilibrium is a common cost threshold gamma*(R),
the root of

    Phi(gamma) = E_m[(R/(m+1) - gamma) * 1{m+1 >= n0}],  m ~ B(N-1, F(gamma)),

which is strictly decreasing with a guaranteed sign change on
(R/N, R/n0), so bisection is safe. Model B replaces the bracket with a
root scan of Psi(gamma) = E_m[R/(m+1) * 1{m+1 >= n0}] - gamma and keeps the
largest root (pareto-preferred by all users); Psi may have no root for small
R, in which case nobody collaborates.
"""
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .backend import kernels, log_binom_coeffs
from .costs import CostDistribution, KnownCosts
from .errors import DomainError, NumericalError

BISECT_MAX_ITERS = 200
BISECT_TOL = 1e-13
RESIDUAL_TOL = 1e-10
MIXED_SCAN_POINTS = 1024
MODEL_B_ROOT_POINTS = 4096

INFO_COMPLETE = "complete"
INFO_SYMMETRIC = "symmetric"
INFO_ASYMMETRIC = "asymmetric"


@dataclass(frozen=True)
class AcquisitionScenario:
    """One game instance: population, threshold, revenue, payoff and info model."""

    n_users: int
    n_required: int
    revenue: float
    payoff_model: str = "A"
    info: str = INFO_ASYMMETRIC
    known_costs: KnownCosts | None = None
    cost_model: CostDistribution | None = None

    def __post_init__(self):
        if self.n_users < 2:
            raise DomainError("need at least 2 users")
        if not 1 <= self.n_required < self.n_users:
            raise DomainError(f"need 1 <= n0 < N, got n0={self.n_required}, N={self.n_users}")
        if self.revenue < 0:
            raise DomainError("revenue must be nonnegative")
        if self.payoff_model not in ("A", "B"):
            raise DomainError(f"payoff_model must be 'A' or 'B', got {self.payoff_model!r}")
        if self.info == INFO_COMPLETE:
            if self.known_costs is None or len(self.known_costs) != self.n_users:
                raise DomainError("complete info needs known costs, one per user")
        elif self.info in (INFO_SYMMETRIC, INFO_ASYMMETRIC):
            if self.cost_model is None:
                raise DomainError(f"{self.info} info needs a cost distribution")
        else:
            raise DomainError(f"unknown info scenario {self.info!r}")

    @classmethod
    def complete(cls, costs, n_required, revenue, payoff_model="A"):
        kc = costs if isinstance(costs, KnownCosts) else KnownCosts(tuple(costs))
        return cls(n_users=len(kc), n_required=n_required, revenue=revenue,
                   payoff_model=payoff_model, info=INFO_COMPLETE, known_costs=kc)

    @classmethod
    def symmetric(cls, n_users, n_required, revenue, cost_model, payoff_model="A"):
        return cls(n_users=n_users, n_required=n_required, revenue=revenue,
                   payoff_model=payoff_model, info=INFO_SYMMETRIC, cost_model=cost_model)

    @classmethod
    def asymmetric(cls, n_users, n_required, revenue, cost_model, payoff_model="A"):
        return cls(n_users=n_users, n_required=n_required, revenue=revenue,
                   payoff_model=payoff_model, info=INFO_ASYMMETRIC, cost_model=cost_model)


@dataclass(frozen=True)
class RewardGrid:
    """Resolution of the Stage-I discretization of [0, V]."""

    points: int = 1001

    def __post_init__(self):
        if self.points < 2:
            raise DomainError("reward grid needs at least 2 points")


@dataclass
class Stage2:
    """Stage-II equilibrium descriptor; exactly one payload is meaningful."""

    kind: str  # none | pure_set | pure_count | mixed | threshold
    collaborators: tuple[int, ...] | None = None
    count: int | None = None
    mixing_prob: float | None = None
    threshold: float | None = None


@dataclass
class AcquisitionEquilibrium:
    reward: float
    stage2: Stage2
    success_prob: float
    expected_profit: float
    user_payoffs: np.ndarray | None = None
    diagnostics: dict = field(default_factory=dict)


class MixedCurvePoint(NamedTuple):
    reward: float
    mixing_prob: float
    success_prob: float
    expected_profit: float


class RewardCurvePoint(NamedTuple):
    reward: float
    threshold: float
    success_prob: float
    expected_profit: float


@dataclass
class InfoComparison:
    symmetric_profit: float
    asymmetric_profit: float
    asymmetric_reward: float
    ordering_applicable: bool  # the ordering claim concerns V >= n0*mu only
    ordering_ok: bool
    model_b_reward: float | None = None
    model_b_geq_model_a: bool | None = None
    grid_step: float = 0.0


# ---------------------------------------------------------------------------
# indifference functions
# ---------------------------------------------------------------------------

def phi_threshold(scenario: AcquisitionScenario, reward: float, gamma: float) -> float:
    """Model-A asymmetric indifference Phi(gamma); model B gives Psi(gamma)."""
    n = scenario.n_users
    p = scenario.cost_model.cdf(gamma)
    share, tail = kernels.share_and_tail(reward, n - 1, scenario.n_required,
                                         p, log_binom_coeffs(n - 1))
    if scenario.payoff_model == "A":
        return share - gamma * tail
    return share - gamma


def mixed_indifference(scenario: AcquisitionScenario, reward: float, p: float) -> float:
    """Expected payoff of collaborating when all others mix with probability p."""
    n = scenario.n_users
    mu = scenario.cost_model.mean()
    share, tail = kernels.share_and_tail(reward, n - 1, scenario.n_required,
                                         p, log_binom_coeffs(n - 1))
    if scenario.payoff_model == "A":
        return share - mu * tail
    return share - mu


def _bisect(fn, lo, hi, f_lo):
    """Bisection on a bracket with f(lo) sign f_lo, f(hi) the opposite sign."""
    pos_lo = f_lo > 0
    for _ in range(BISECT_MAX_ITERS):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if (fn(mid) > 0) == pos_lo:
            lo = mid
        else:
            hi = mid
        if hi - lo <= BISECT_TOL * max(1.0, abs(hi)):
            break
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Stage II solvers
# ---------------------------------------------------------------------------

def solve_complete(scenario: AcquisitionScenario) -> AcquisitionEquilibrium:
    """Unique pure SPE under complete information (identical for models A/B).

    The master pays n0 times the n0-th smallest cost when the revenue covers
    it; the n0 cheapest users collaborate, the marginal one at zero payoff.
    Equal costs are broken by user index and flagged (they induce multiple
    Stage-II equilibria with identical master performance).
    """
    if scenario.info != INFO_COMPLETE:
        raise DomainError("solve_complete needs a complete-information scenario")
    costs = scenario.known_costs.as_array()
    n0 = scenario.n_required
    order = np.argsort(costs, kind="stable")
    pivot = float(costs[order[n0 - 1]])
    reward = n0 * pivot
    diagnostics = {}
    if np.count_nonzero(costs == pivot) > 1:
        diagnostics["tied_pivot_cost"] = (
            "multiple users share the n0-th smallest cost; tie broken by index, "
            "other collaborator sets are equilibria too")
    if scenario.revenue < reward:
        return AcquisitionEquilibrium(
            reward=0.0, stage2=Stage2(kind="none", collaborators=()),
            success_prob=0.0, expected_profit=0.0,
            user_payoffs=np.zeros(scenario.n_users), diagnostics=diagnostics)
    collaborators = tuple(sorted(int(i) for i in order[:n0]))
    payoffs = np.zeros(scenario.n_users)
    for i in collaborators:
        payoffs[i] = pivot - costs[i]
    return AcquisitionEquilibrium(
        reward=reward,
        stage2=Stage2(kind="pure_set", collaborators=collaborators, count=n0),
        success_prob=1.0,
        expected_profit=scenario.revenue - reward,
        user_payoffs=payoffs,
        diagnostics=diagnostics)


def stage2_pure_count(scenario: AcquisitionScenario, reward: float) -> int:
    """Pure-NE collaborator count under symmetric incomplete information."""
    if scenario.info != INFO_SYMMETRIC:
        raise DomainError("stage2_pure_count needs a symmetric-information scenario")
    mu = scenario.cost_model.mean()
    n_users = scenario.n_users
    if reward < scenario.n_required * mu:
        return 0
    if reward >= n_users * mu:
        return n_users
    n = int(reward // mu)
    # integer correction against float fuzz at lattice boundaries
    while (n + 1) * mu <= reward:
        n += 1
    while n * mu > reward:
        n -= 1
    return min(n, n_users)


def solve_symmetric_pure(scenario: AcquisitionScenario) -> AcquisitionEquilibrium:
    """Stage-I optimum under symmetric incomplete information: R* = n0 * mu.

    Exactly n0 users collaborate (lexicographically smallest index set among
    the equally-performing pure NEs); collaborators break even in expectation.
    Identical for payoff models A and B.
    """
    if scenario.info != INFO_SYMMETRIC:
        raise DomainError("solve_symmetric_pure needs a symmetric-information scenario")
    mu = scenario.cost_model.mean()
    n0 = scenario.n_required
    reward = n0 * mu
    if scenario.revenue < reward:
        return AcquisitionEquilibrium(
            reward=0.0, stage2=Stage2(kind="none", collaborators=()),
            success_prob=0.0, expected_profit=0.0,
            user_payoffs=np.zeros(scenario.n_users))
    payoffs = np.zeros(scenario.n_users)
    payoffs[:n0] = reward / n0 - mu  # zero, exactly so for dyadic mu
    return AcquisitionEquilibrium(
        reward=reward,
        stage2=Stage2(kind="pure_set", collaborators=tuple(range(n0)), count=n0),
        success_prob=1.0,
        expected_profit=scenario.revenue - reward,
        user_payoffs=payoffs)


def _scan_sign_changes(fn, xs):
    vals = [fn(x) for x in xs]
    for v, x in zip(vals, xs):
        if not math.isfinite(v):
            raise NumericalError(f"indifference function not finite at {x}")
    intervals = []
    for j in range(len(xs) - 1):
        if vals[j] == 0.0:
            intervals.append((xs[j], xs[j], vals[j]))
        elif vals[j] * vals[j + 1] < 0:
            intervals.append((xs[j], xs[j + 1], vals[j]))
    if vals[-1] == 0.0:
        intervals.append((xs[-1], xs[-1], vals[-1]))
    return intervals


def solve_symmetric_mixed(scenario: AcquisitionScenario, reward: float) -> float | None:
    """Mixed-strategy NE probability p*, or None when no mixed NE exists.

    Model A: the unique interior root of the indifference condition on
    n0*mu < R < N*mu (p* = 0 and p* = 1 are not mixed strategies).  Model B:
    a root exists only for sufficiently large R; if the scan brackets more
    than one root the solver refuses to pick silently.
    """
    if scenario.info != INFO_SYMMETRIC:
        raise DomainError("solve_symmetric_mixed needs a symmetric-information scenario")
    mu = scenario.cost_model.mean()
    n_users = scenario.n_users
    if scenario.payoff_model == "A":
        if not scenario.n_required * mu < reward < n_users * mu:
            return None

    def u(p):
        return mixed_indifference(scenario, reward, p)

    ps = np.linspace(0.0, 1.0, MIXED_SCAN_POINTS + 2)[1:-1]
    intervals = _scan_sign_changes(u, ps)
    if not intervals and scenario.payoff_model == "A":
        # positive hump can sit below the first grid point; probe geometrically
        p_probe = float(ps[0])
        for _ in range(960):
            p_probe *= 0.5
            if p_probe <= 0.0:
                break
            if u(p_probe) > 0:
                intervals = [(p_probe, float(ps[0]), u(p_probe))]
                break
    if not intervals:
        return None
    if len(intervals) > 1:
        raise NumericalError(
            f"{len(intervals)} sign changes for the mixed indifference at R={reward}: "
            f"{[(a, b) for a, b, _ in intervals]}; refusing to pick one")
    lo, hi, f_lo = intervals[0]
    p_star = lo if lo == hi else _bisect(u, lo, hi, f_lo)
    resid = u(p_star)
    if abs(resid) > RESIDUAL_TOL:
        raise NumericalError(f"mixed NE residual {resid} exceeds {RESIDUAL_TOL}")
    return float(p_star)


def solve_asymmetric_threshold(scenario: AcquisitionScenario, reward: float,
                               root_points: int = MODEL_B_ROOT_POINTS) -> float | None:
    """Equilibrium cost threshold gamma*(R) under asymmetric information.

    Model A: bisection on the guaranteed bracket (R/N, R/n0); if F is already
    1 at the left endpoint every user collaborates and the root degenerates
    to R/N itself.  Model B: scan `root_points` gammas on (0, R/n0] and keep
    the largest root, or None when the equation has no solution (R too small).
    """
    if scenario.info != INFO_ASYMMETRIC:
        raise DomainError("solve_asymmetric_threshold needs an asymmetric scenario")
    if reward <= 0:
        raise DomainError("reward must be positive")
    n_users, n0 = scenario.n_users, scenario.n_required
    cdf = scenario.cost_model.cdf

    def f(g):
        return phi_threshold(scenario, reward, g)

    if scenario.payoff_model == "B":
        gs = np.linspace(0.0, reward / n0, root_points + 1)[1:]
        intervals = _scan_sign_changes(f, gs)
        if not intervals:
            return None
        lo, hi, f_lo = intervals[-1]
        g_star = lo if lo == hi else _bisect(f, lo, hi, f_lo)
        return float(g_star)

    lo = reward / n_users
    hi = reward / n0
    eps = 1e-12 * reward
    if cdf(lo + eps) >= 1.0:
        # all cost mass below R/N: everyone collaborates and Phi(R/N) = 0
        return float(lo)
    f_lo = f(lo + eps)
    if f_lo < 0:
        raise NumericalError(
            f"threshold bracket failed at R={reward}: Phi({lo + eps})={f_lo} "
            "(expected > 0)")
    f_hi = f(hi - eps)
    if f_hi > 0:
        if cdf(hi - eps) == 0.0 and n0 == 1:
            # no cost mass below R at all: the root sits at the right
            # boundary and nobody collaborates
            return float(hi)
        raise NumericalError(
            f"threshold bracket failed at R={reward}: Phi({hi - eps})={f_hi} "
            "(expected < 0)")
    if f_lo == 0.0 and f_hi == 0.0 and f(0.5 * (lo + hi)) == 0.0:
        # success probability underflows on the whole bracket: the reward is
        # too small for a representable equilibrium, collaboration is dead
        return float(lo)
    # bisect on the boundary between Phi >= 0 and Phi < 0 (handles an
    # underflow-flattened left end as well as the regular sign change)
    g_lo, g_hi = lo + eps, hi - eps
    for _ in range(BISECT_MAX_ITERS):
        mid = 0.5 * (g_lo + g_hi)
        if mid <= g_lo or mid >= g_hi:
            break
        if f(mid) >= 0:
            g_lo = mid
        else:
            g_hi = mid
        if g_hi - g_lo <= BISECT_TOL * max(1.0, abs(g_hi)):
            break
    g_star = 0.5 * (g_lo + g_hi)
    resid = f(g_star)
    if abs(resid) > RESIDUAL_TOL:
        raise NumericalError(f"threshold residual {resid} exceeds {RESIDUAL_TOL}")
    return float(g_star)


# ---------------------------------------------------------------------------
# Stage I for the asymmetric scenario
# ---------------------------------------------------------------------------

def success_probability(scenario: AcquisitionScenario, gamma: float) -> float:
    """P(n >= n0) with n ~ B(N, F(gamma))."""
    n = scenario.n_users
    p = scenario.cost_model.cdf(gamma)
    return float(kernels.binom_tail_k(n, p, scenario.n_required, log_binom_coeffs(n)))


def evaluate_asymmetric_reward(scenario: AcquisitionScenario, reward: float,
                               root_points: int = MODEL_B_ROOT_POINTS) -> RewardCurvePoint:
    """Stage-II equilibrium and master's expected profit at one reward level."""
    if reward <= 0:
        return RewardCurvePoint(reward, math.nan, 0.0, 0.0)
    gamma = solve_asymmetric_threshold(scenario, reward, root_points=root_points)
    if gamma is None:
        return RewardCurvePoint(reward, math.nan, 0.0, 0.0)
    success = success_probability(scenario, gamma)
    return RewardCurvePoint(reward, gamma, success,
                            (scenario.revenue - reward) * success)


def optimize_reward_asymmetric(scenario: AcquisitionScenario,
                               grid: RewardGrid | None = None,
                               root_points: int = MODEL_B_ROOT_POINTS
                               ) -> AcquisitionEquilibrium:
    """Grid maximization of f(R) = (V - R) P(n >= n0) over [0, V].

    Ties go to the smallest reward; R* = 0 when the whole curve is
    nonpositive. The evaluated curve is kept in diagnostics["curve"].
    """
    if scenario.info != INFO_ASYMMETRIC:
        raise DomainError("optimize_reward_asymmetric needs an asymmetric scenario")
    grid = grid or RewardGrid()
    rewards = np.linspace(0.0, scenario.revenue, grid.points)
    curve = [evaluate_asymmetric_reward(scenario, float(r), root_points=root_points)
             for r in rewards]
    profits = np.array([pt.expected_profit for pt in curve])
    best = int(np.argmax(profits))  # first maximum = smallest R on ties
    diagnostics = {"curve": curve, "grid_step": float(rewards[1] - rewards[0])
                   if grid.points > 1 else 0.0}
    if profits[best] <= 0.0:
        return AcquisitionEquilibrium(
            reward=0.0, stage2=Stage2(kind="none"), success_prob=0.0,
            expected_profit=0.0, diagnostics=diagnostics)
    pt = curve[best]
    return AcquisitionEquilibrium(
        reward=pt.reward,
        stage2=Stage2(kind="threshold", threshold=pt.threshold),
        success_prob=pt.success_prob,
        expected_profit=pt.expected_profit,
        diagnostics=diagnostics)


def expected_collaborators(scenario: AcquisitionScenario, reward: float,
                           root_points: int = MODEL_B_ROOT_POINTS) -> float:
    """N * F(gamma*(R)), the mean Stage-II collaborator count."""
    if scenario.info != INFO_ASYMMETRIC:
        raise DomainError("expected_collaborators needs an asymmetric scenario")
    if reward <= 0:
        return 0.0
    gamma = solve_asymmetric_threshold(scenario, reward, root_points=root_points)
    if gamma is None:
        return 0.0
    return scenario.n_users * scenario.cost_model.cdf(gamma)


def mixed_profit_curve(scenario: AcquisitionScenario,
                       grid: RewardGrid | None = None) -> list[MixedCurvePoint]:
    """Master's expected profit along the mixed NE for R in (n0*mu, N*mu).

    Emitted for inspection only; the Stage-I recommendation stays the pure
    R* = n0*mu since the mixed NE risks failing the threshold. Rewards
    without a mixed NE are omitted.
    """
    if scenario.info != INFO_SYMMETRIC:
        raise DomainError("mixed_profit_curve needs a symmetric-information scenario")
    grid = grid or RewardGrid(101)
    mu = scenario.cost_model.mean()
    n = scenario.n_users
    lo, hi = scenario.n_required * mu, n * mu
    rewards = np.linspace(lo, hi, grid.points + 2)[1:-1]
    out = []
    for r in rewards:
        p_star = solve_symmetric_mixed(scenario, float(r))
        if p_star is None:
            continue
        success = float(kernels.binom_tail_k(n, p_star, scenario.n_required,
                                             log_binom_coeffs(n)))
        out.append(MixedCurvePoint(float(r), p_star, success,
                                   (scenario.revenue - r) * success))
    return out


def compare_information_scenarios(n_users: int, n_required: int, revenue: float,
                                  cost_model: CostDistribution,
                                  grid: RewardGrid | None = None,
                                  include_model_b: bool = False) -> InfoComparison:
    """Information-scenario ordering: asymmetric profit vs symmetric profit.

    The ordering claim (asymmetric never beats symmetric) applies whenever
    V >= n0*mu; below that the symmetric game collapses to zero reward while
    the asymmetric master can still profit from lucky low-cost realizations,
    so no flag is raised there. Optionally also optimizes the model-B
    asymmetric game to compare rewards (model B needs a weakly larger R*
    than model A on matched instances).
    """
    grid = grid or RewardGrid()
    mu = cost_model.mean()
    sym_profit = max(revenue - n_required * mu, 0.0)
    applicable = revenue >= n_required * mu
    scen_a = AcquisitionScenario.asymmetric(n_users, n_required, revenue, cost_model)
    eq_a = optimize_reward_asymmetric(scen_a, grid)
    step = eq_a.diagnostics.get("grid_step", 0.0)
    ordering_ok = (not applicable) or eq_a.expected_profit <= sym_profit + 1e-9
    model_b_reward = None
    model_b_geq = None
    if include_model_b:
        scen_b = AcquisitionScenario.asymmetric(n_users, n_required, revenue,
                                                cost_model, payoff_model="B")
        eq_b = optimize_reward_asymmetric(scen_b, grid)
        model_b_reward = eq_b.reward
        model_b_geq = eq_b.reward >= eq_a.reward - step - 1e-9
    return InfoComparison(
        symmetric_profit=sym_profit,
        asymmetric_profit=eq_a.expected_profit,
        asymmetric_reward=eq_a.reward,
        ordering_applicable=applicable,
        ordering_ok=ordering_ok,
        model_b_reward=model_b_reward,
        model_b_geq_model_a=model_b_geq,
        grid_step=step)

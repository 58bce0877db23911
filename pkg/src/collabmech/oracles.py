"""Independent brute-force verifiers.

Nothing here reuses the solvers' expectation shortcuts: NE enumeration walks
all 2^N strategy profiles, feasibility enumerates every IR/IC constraint
literally, and the contract grid oracle evaluates expected profit by full
multinomial enumeration with exact integer coefficients. Size guards fail
loudly instead of truncating.

Weak-inequality comparisons carry a small tolerance: the interesting
equilibria sit exactly on payoff boundaries (the marginal collaborator
breaks even by construction), where bare float comparisons would flip on
rounding noise.
"""
import math
from typing import Callable, NamedTuple

import numpy as np

from .contracts import FEAS_TOL, Contract
from .errors import DomainError, NumericalError

NE_GUARD_USERS = 20
IR_IC_GUARD_TYPES = 12
GRID_GUARD_TYPES = 3
GRID_GUARD_POPULATION = 15
GRID_GUARD_POINTS = 50


def enumerate_pure_ne(costs, reward: float, n_required: int,
                      payoff_model: str = "A") -> list[tuple[int, ...]]:
    """All pure Nash equilibria of the Stage-II game, as 0/1 bit-vectors.

    Checks unilateral-deviation stability of every profile under the chosen
    payoff model. Guarded to N <= 20.
    """
    c = np.asarray(costs, dtype=float)
    n = c.size
    if n > NE_GUARD_USERS:
        raise DomainError(f"NE enumeration guarded to N <= {NE_GUARD_USERS}")
    if payoff_model not in ("A", "B"):
        raise DomainError("payoff_model must be 'A' or 'B'")
    tol = 1e-9 * max(1.0, reward, float(c.max()))
    masks = np.arange(1 << n, dtype=np.int64)
    profiles = ((masks[:, None] >> np.arange(n)) & 1).astype(bool)
    sizes = profiles.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        share_in = np.where(sizes > 0, reward / np.maximum(sizes, 1), 0.0)
    share_join = reward / (sizes + 1)
    ok_in = sizes >= n_required
    ok_join = sizes + 1 >= n_required
    if payoff_model == "A":
        pay_in = (share_in[:, None] - c[None, :]) * ok_in[:, None]
        pay_join = (share_join[:, None] - c[None, :]) * ok_join[:, None]
    else:
        pay_in = share_in[:, None] * ok_in[:, None] - c[None, :]
        pay_join = share_join[:, None] * ok_join[:, None] - c[None, :]
    stay_ok = np.where(profiles, pay_in >= -tol, True).all(axis=1)
    out_ok = np.where(~profiles, pay_join <= tol, True).all(axis=1)
    ne_rows = np.flatnonzero(stay_ok & out_ok)
    return [tuple(int(b) for b in profiles[row]) for row in ne_rows]


class ConstraintViolation(NamedTuple):
    kind: str   # "IR" or "IC"
    type_index: int
    against: int
    margin: float


def enumerate_ir_ic(contract: Contract, unit_costs) -> list[ConstraintViolation]:
    """Literal evaluation of all I^2 IR/IC constraints; empty list = feasible."""
    k = np.asarray(unit_costs, dtype=float)
    n = k.size
    if n > IR_IC_GUARD_TYPES:
        raise DomainError(f"IR/IC enumeration guarded to I <= {IR_IC_GUARD_TYPES}")
    if len(contract) != n:
        raise DomainError("contract and unit costs must align")
    r = contract.rewards
    t = contract.tasks
    violations = []
    for i in range(n):
        own = r[i] - k[i] * t[i]
        if own < -FEAS_TOL:
            violations.append(ConstraintViolation("IR", i, i, float(own)))
        for j in range(n):
            if j == i:
                continue
            margin = own - (r[j] - k[i] * t[j])
            if margin < -FEAS_TOL:
                violations.append(ConstraintViolation("IC", i, j, float(margin)))
    return violations


def dense_root_scan(fn: Callable[[float], float], lo: float, hi: float,
                    points: int) -> list[tuple[float, float]]:
    """Every sign-change interval of fn on [lo, hi] sampled at `points` nodes.

    Exact zeros at nodes come back as degenerate intervals. Non-finite values
    abort.
    """
    if not lo < hi:
        raise DomainError("need lo < hi")
    if points < 2:
        raise DomainError("need at least 2 scan points")
    xs = np.linspace(lo, hi, points)
    vals = np.array([fn(float(x)) for x in xs])
    if not np.all(np.isfinite(vals)):
        bad = xs[~np.isfinite(vals)][0]
        raise NumericalError(f"scan function not finite at {bad}")
    out = []
    for j in range(points - 1):
        if vals[j] == 0.0:
            out.append((float(xs[j]), float(xs[j])))
        elif vals[j] * vals[j + 1] < 0:
            out.append((float(xs[j]), float(xs[j + 1])))
    if vals[-1] == 0.0:
        out.append((float(xs[-1]), float(xs[-1])))
    return out


# ---------------------------------------------------------------------------
# contract oracles
# ---------------------------------------------------------------------------

def grid_complete_contract_oracle(unit_costs, weights, capacities, counts,
                                  points: int = 20001, refine_passes: int = 2):
    """Dense 1-D grid maximization of each type's complete-information profit.

    The search window [0, min(capacity, theta/K)] covers the stationary point
    by a plain calculus bound, no closed form involved; each refinement pass
    zooms one cell around the incumbent (the objective is concave). Returns
    (tasks, profit).
    """
    k = np.asarray(unit_costs, dtype=float)
    th = np.asarray(weights, dtype=float)
    tb = np.asarray(capacities, dtype=float)
    cnt = np.asarray(counts, dtype=float)
    tasks = np.zeros(k.size)
    profit = 0.0
    for i in range(k.size):
        if cnt[i] <= 0:
            continue
        cap = min(tb[i], th[i] / k[i])
        lo, hi = 0.0, cap
        best_t, best_v = 0.0, -math.inf
        for _ in range(max(refine_passes, 1)):
            grid = np.linspace(lo, hi, points)
            vals = th[i] * np.log1p(cnt[i] * grid) - cnt[i] * k[i] * grid
            j = int(np.argmax(vals))
            if vals[j] > best_v:
                best_t, best_v = float(grid[j]), float(vals[j])
            step = grid[1] - grid[0] if points > 1 else 0.0
            lo = max(best_t - step, 0.0)
            hi = min(best_t + step, cap)
        tasks[i] = best_t
        profit += best_v
    return tasks, profit


def _exact_multinomial_table(population: int, probs) -> tuple[np.ndarray, np.ndarray]:
    """All compositions of the population with exact-coefficient weights."""
    q = np.asarray(probs, dtype=float)
    n_types = q.size

    def rec(remaining, slots):
        if slots == 1:
            yield (remaining,)
            return
        for first in range(remaining + 1):
            for rest in rec(remaining - first, slots - 1):
                yield (first,) + rest

    counts = []
    weights = []
    for comp in rec(population, n_types):
        coeff = math.factorial(population)
        w = 1.0
        for n_i, q_i in zip(comp, q):
            coeff //= math.factorial(n_i)
            w *= q_i ** n_i
        counts.append(comp)
        weights.append(coeff * w)
    return np.asarray(counts, dtype=float), np.asarray(weights)


def grid_contract_oracle(profile, grid_resolution: int = 50, refine_passes: int = 3):
    """Exhaustive monotone-task grid search for the incomplete-info contract.

    Rewards follow the telescoping rule, expected profit is the full
    multinomial enumeration. Each pass scans at most `grid_resolution` points
    per task dimension and the window then zooms on the incumbent cell
    (the objective is concave, so zooming cannot lose the optimum).
    Guards: I <= 3, N <= 15, grid <= 50. Returns (tasks, rewards, profit).
    """
    if profile.type_probs is None:
        raise DomainError("grid_contract_oracle needs a probabilistic population")
    n_types = profile.n_types
    if n_types > GRID_GUARD_TYPES:
        raise DomainError(f"grid oracle guarded to I <= {GRID_GUARD_TYPES}")
    if profile.population > GRID_GUARD_POPULATION:
        raise DomainError(f"grid oracle guarded to N <= {GRID_GUARD_POPULATION}")
    if grid_resolution > GRID_GUARD_POINTS:
        raise DomainError(f"grid oracle guarded to <= {GRID_GUARD_POINTS} points per dimension")
    k = np.asarray(profile.unit_costs)
    th = np.asarray(profile.weights)
    tb = np.asarray(profile.capacities, dtype=float)
    chain_caps = np.minimum.accumulate(tb[::-1])[::-1]
    t_cap = float(np.max(th) / np.min(k))  # stationary tasks cannot exceed this
    los = np.zeros(n_types)
    his = np.minimum(chain_caps, t_cap)
    counts_tbl, weights_tbl = _exact_multinomial_table(profile.population,
                                                       profile.type_probs)
    best_tasks = None
    best_profit = -math.inf
    for _ in range(max(refine_passes, 1)):
        axes = [np.linspace(los[i], his[i], grid_resolution) for i in range(n_types)]
        mesh = np.meshgrid(*axes, indexing="ij")
        cand = np.stack([m.ravel() for m in mesh], axis=1)
        keep = np.ones(cand.shape[0], dtype=bool)
        for i in range(1, n_types):
            keep &= cand[:, i] >= cand[:, i - 1]
        cand = cand[keep]
        rewards = np.empty_like(cand)
        rewards[:, 0] = k[0] * cand[:, 0]
        for i in range(1, n_types):
            rewards[:, i] = rewards[:, i - 1] + k[i] * (cand[:, i] - cand[:, i - 1])
        profits = np.zeros(cand.shape[0])
        for row, w in zip(counts_tbl, weights_tbl):
            log_term = (th * np.log1p(row[None, :] * cand)).sum(axis=1)
            pay_term = (row[None, :] * rewards).sum(axis=1)
            profits += w * (log_term - pay_term)
        j = int(np.argmax(profits))
        if profits[j] > best_profit:
            best_profit = float(profits[j])
            best_tasks = cand[j].copy()
        # zoom one cell around the incumbent in every dimension
        steps = np.array([ax[1] - ax[0] if ax.size > 1 else 0.0 for ax in axes])
        los = np.maximum(best_tasks - steps, 0.0)
        his = np.minimum(best_tasks + steps, np.minimum(chain_caps, t_cap))
    best_rewards = np.empty(n_types)
    best_rewards[0] = k[0] * best_tasks[0]
    for i in range(1, n_types):
        best_rewards[i] = best_rewards[i - 1] + k[i] * (best_tasks[i] - best_tasks[i - 1])
    return best_tasks, best_rewards, best_profit

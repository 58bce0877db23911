"""Monte Carlo of realized outcomes over repeated time slots.

Each slot draws fresh user costs (acquisition) or a fresh type-count vector
(contracts) from an independent sub-stream of the master seed, so runs are
reproducible and slots could be evaluated in any order. There is no
cross-slot state.
"""
from dataclasses import dataclass, field

import numpy as np

from .acquisition import AcquisitionScenario, solve_asymmetric_threshold
from .contracts import (ContractSolution, UserTypeProfile,
                        complete_items_for_counts, realized_profit)
from .errors import DomainError
from .prob import RngHandle, sample_type_counts


@dataclass
class AcquisitionSimRun:
    scenario: AcquisitionScenario
    reward: float
    threshold: float | None
    slots: int
    seed: int
    collaborators: np.ndarray = field(repr=False)
    success: np.ndarray = field(repr=False)
    realized_profit: np.ndarray = field(repr=False)


@dataclass
class ContractSimRun:
    profile: UserTypeProfile
    slots: int
    seed: int
    counts: np.ndarray = field(repr=False)
    incomplete_profit: np.ndarray = field(repr=False)
    complete_profit: np.ndarray = field(repr=False)
    ratio: np.ndarray = field(repr=False)


def simulate_acquisition(scenario: AcquisitionScenario, reward: float,
                         slots: int, seed: int) -> AcquisitionSimRun:
    """Realized acquisition outcomes: per slot the profit is (V-R) or 0.

    The threshold gamma*(R) is solved once; each slot draws N i.i.d. costs,
    users below the threshold collaborate, success needs at least n0 of them.
    """
    if scenario.info != "asymmetric":
        raise DomainError("simulate_acquisition needs an asymmetric scenario")
    if slots < 1:
        raise DomainError("slots must be >= 1")
    gamma = solve_asymmetric_threshold(scenario, reward)
    master = RngHandle(seed)
    n_collab = np.zeros(slots, dtype=np.int64)
    success = np.zeros(slots, dtype=bool)
    profit = np.zeros(slots)
    for s in range(slots):
        if gamma is None:
            continue  # no equilibrium threshold (model B, reward too small)
        draws = scenario.cost_model.sample(master.spawn(s), scenario.n_users)
        count = int(np.count_nonzero(draws.as_array() <= gamma))
        n_collab[s] = count
        if count >= scenario.n_required:
            success[s] = True
            profit[s] = scenario.revenue - reward
    return AcquisitionSimRun(scenario=scenario, reward=reward, threshold=gamma,
                             slots=slots, seed=seed, collaborators=n_collab,
                             success=success, realized_profit=profit)


def simulate_contract(profile: UserTypeProfile, solution: ContractSolution,
                      slots: int, seed: int) -> ContractSimRun:
    """Fixed incomplete-info menu vs per-slot re-optimized complete contract.

    The complete-information benchmark treats each slot's realized counts as
    known type sizes, so its realized profit is per-slot optimal and the
    ratio stays <= 1 wherever the benchmark is positive (ratio is NaN when
    the benchmark profit is not positive).
    """
    if profile.type_probs is None:
        raise DomainError("simulate_contract needs a probabilistic population")
    if slots < 1:
        raise DomainError("slots must be >= 1")
    master = RngHandle(seed)
    weights = np.asarray(profile.weights)
    counts = np.zeros((slots, profile.n_types), dtype=np.int64)
    inc = np.zeros(slots)
    comp = np.zeros(slots)
    ratio = np.full(slots, np.nan)
    for s in range(slots):
        c = sample_type_counts(profile.population, profile.type_probs, master.spawn(s))
        counts[s] = c
        inc[s] = realized_profit(solution.contract, c, weights)
        _, _, comp[s] = complete_items_for_counts(
            c, profile.unit_costs, profile.weights, profile.capacities)
        if comp[s] > 0:
            ratio[s] = inc[s] / comp[s]
    return ContractSimRun(profile=profile, slots=slots, seed=seed, counts=counts,
                          incomplete_profit=inc, complete_profit=comp, ratio=ratio)

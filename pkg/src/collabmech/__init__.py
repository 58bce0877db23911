"""Equilibria and optimal incentives for master-user collaboration games.

Two mechanisms:

* a threshold-revenue reward game for crowd data acquisition (complete /
  symmetric / asymmetric cost information, two payoff conventions), and
* screening contracts for distributed computing (complete and
  asymmetrically incomplete type information),

plus brute-force oracles and a seeded Monte Carlo harness.
"""
from .acquisition import (AcquisitionEquilibrium, AcquisitionScenario,
                          RewardGrid, Stage2, compare_information_scenarios,
                          expected_collaborators, mixed_profit_curve,
                          optimize_reward_asymmetric, solve_asymmetric_threshold,
                          solve_complete, solve_symmetric_mixed,
                          solve_symmetric_pure)
from .backend import active_backend, get_kernels
from .contracts import (Contract, ContractItem, ContractSolution,
                        UserTypeProfile, aggregate_user_payoff,
                        check_feasibility, expected_profit,
                        optimal_rewards_given_tasks, realized_profit,
                        solve_complete_contract, solve_incomplete_contract)
from .costs import (EmpiricalCosts, GaussianCosts, KnownCosts, UniformCosts,
                    cost_model_from_config)
from .errors import CollabMechError, DomainError, NumericalError
from .prob import (BinomialSpec, RngHandle, binom_expect, binom_pmf,
                   binom_tail, composition_count, multinomial_compositions,
                   sample_type_counts)
from .sim import simulate_acquisition, simulate_contract

__version__ = "0.1.0"

__all__ = [
    "AcquisitionEquilibrium", "AcquisitionScenario", "BinomialSpec",
    "CollabMechError", "Contract", "ContractItem", "ContractSolution",
    "DomainError", "EmpiricalCosts", "GaussianCosts", "KnownCosts",
    "NumericalError", "RewardGrid", "RngHandle", "Stage2", "UniformCosts",
    "UserTypeProfile", "active_backend", "aggregate_user_payoff",
    "binom_expect", "binom_pmf", "binom_tail", "check_feasibility",
    "compare_information_scenarios", "composition_count",
    "cost_model_from_config", "expected_collaborators", "expected_profit",
    "get_kernels", "mixed_profit_curve", "multinomial_compositions",
    "optimal_rewards_given_tasks", "optimize_reward_asymmetric",
    "realized_profit", "sample_type_counts", "simulate_acquisition",
    "simulate_contract", "solve_asymmetric_threshold", "solve_complete",
    "solve_complete_contract", "solve_incomplete_contract",
    "solve_symmetric_mixed", "solve_symmetric_pure",
]

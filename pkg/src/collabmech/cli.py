"""Command-line front end.

Subcommands::

    collabmech acq solve|sweep|simulate   --config game.json ...
    collabmech contract solve|check|sweep --config game.json ...
    collabmech verify acq-ne|contract-feas|contract-grid|prob ...

Configs are JSON with exactly one game section (``acquisition`` or
``contract``) plus an optional ``solver`` section (grid sizes, seed, slots)
and an optional ``sweep`` section holding default sweep arguments. All CSV
and JSON output is deterministic given config + seed; CSV numbers carry 12
significant digits with '.' decimals.

Exit codes: 0 success, 1 domain verdict (infeasible contract / oracle
mismatch), 2 config error, 3 numerical failure.
"""
import argparse
import json
import math
import sys

import numpy as np

from . import acquisition as acq
from . import contracts as ct
from . import oracles, sim
from .backend import active_backend
from .costs import KnownCosts, GaussianCosts, cost_model_from_config
from .errors import DomainError, NumericalError
from .prob import (BinomialSpec, binom_pmf_vector, binom_tail,
                   composition_count, multinomial_compositions, multinomial_pmf)

EXIT_OK = 0
EXIT_VERDICT = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _round12(x):
    if isinstance(x, float):
        if math.isnan(x):
            return None
        return float(f"{x:.12g}")
    return x


def _jsonify(obj):
    if isinstance(obj, dict):
        return {k: _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return _round12(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonify(v) for v in obj.tolist()]
    return obj


def _emit(text: str, out_path: str | None):
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_json(payload: dict, out_path: str | None):
    _emit(json.dumps(_jsonify(payload), indent=2, sort_keys=True) + "\n", out_path)


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    return f"{x:.12g}"


def _emit_csv(header: list[str], rows: list[list], out_path: str | None):
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    _emit("\n".join(lines) + "\n", out_path)


def _load_config(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise DomainError("config root must be a JSON object")
    if ("acquisition" in cfg) == ("contract" in cfg):
        raise DomainError("config needs exactly one game section: acquisition or contract")
    return cfg


def _solver_cfg(cfg: dict) -> dict:
    return cfg.get("solver", {})


def _parse_range(spec: str) -> np.ndarray:
    try:
        start, stop, count = spec.split(":")
        start, stop, count = float(start), float(stop), int(count)
    except (ValueError, AttributeError) as exc:
        raise DomainError(f"range must be 'start:stop:count', got {spec!r}") from exc
    if count < 1:
        raise DomainError("range count must be >= 1")
    return np.linspace(start, stop, count)


def _acq_params(cfg: dict) -> dict:
    try:
        section = cfg["acquisition"]
        return {
            "n_users": int(section["N"]),
            "n_required": int(section["n0"]),
            "revenue": float(section["V"]),
            "payoff_model": section.get("model", "A"),
            "info": section["info"],
            "cost_model_cfg": section["cost_model"],
            "reward": section.get("R"),
        }
    except (KeyError, TypeError, ValueError) as exc:
        raise DomainError(f"malformed acquisition config: {exc}") from exc


def _build_scenario(params: dict) -> acq.AcquisitionScenario:
    cm_cfg = params["cost_model_cfg"]
    if params["info"] == "complete":
        if cm_cfg.get("kind") != "known":
            raise DomainError('complete info needs cost_model kind "known"')
        costs = KnownCosts(tuple(float(c) for c in cm_cfg["params"]["costs"]))
        return acq.AcquisitionScenario.complete(
            costs, params["n_required"], params["revenue"], params["payoff_model"])
    model = cost_model_from_config(cm_cfg)
    return acq.AcquisitionScenario(
        n_users=params["n_users"], n_required=params["n_required"],
        revenue=params["revenue"], payoff_model=params["payoff_model"],
        info=params["info"], cost_model=model)


def _profile_from_config(cfg: dict) -> ct.UserTypeProfile:
    try:
        section = cfg["contract"]
        k = tuple(float(x) for x in section["K"])
        theta = tuple(float(x) for x in section["theta"])
        t_bar = tuple(float(x) for x in section["t_bar"])
        pop = section["population"]
        if "counts" in pop:
            return ct.UserTypeProfile.with_counts(k, theta, t_bar, pop["counts"])
        return ct.UserTypeProfile.with_probabilities(
            k, theta, t_bar, int(pop["N"]), tuple(float(x) for x in pop["q"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise DomainError(f"malformed contract config: {exc}") from exc


# ---------------------------------------------------------------------------
# acq subcommands
# ---------------------------------------------------------------------------

def _stage2_payload(stage2: acq.Stage2) -> dict:
    payload = {"kind": stage2.kind}
    if stage2.collaborators is not None:
        payload["collaborators"] = list(stage2.collaborators)
    if stage2.count is not None:
        payload["count"] = stage2.count
    if stage2.mixing_prob is not None:
        payload["mixing_prob"] = stage2.mixing_prob
    if stage2.threshold is not None:
        payload["gamma_star"] = stage2.threshold
    return payload


def cmd_acq_solve(args) -> int:
    cfg = _load_config(args.config)
    params = _acq_params(cfg)
    scenario = _build_scenario(params)
    grid = acq.RewardGrid(int(args.grid or _solver_cfg(cfg).get("reward_grid", 1001)))
    if scenario.info == "complete":
        eq = acq.solve_complete(scenario)
    elif scenario.info == "symmetric":
        eq = acq.solve_symmetric_pure(scenario)
    else:
        eq = acq.optimize_reward_asymmetric(scenario, grid)
    payload = {
        "R_star": eq.reward,
        "stage2": _stage2_payload(eq.stage2),
        "success_prob": eq.success_prob,
        "expected_profit": eq.expected_profit,
    }
    if eq.user_payoffs is not None:
        payload["user_payoffs"] = eq.user_payoffs
    _emit_json(payload, args.out)
    return EXIT_OK


def cmd_acq_sweep(args) -> int:
    cfg = _load_config(args.config)
    params = _acq_params(cfg)
    sweep_cfg = cfg.get("sweep", {})
    param = args.param or sweep_cfg.get("param")
    range_spec = args.range or sweep_cfg.get("range")
    if not param or not range_spec:
        raise DomainError("sweep needs --param and --range (or a config sweep section)")
    if param not in ("R", "delta", "N", "n0", "V"):
        raise DomainError(f"unknown sweep param {param!r}")
    values = _parse_range(range_spec)
    grid = acq.RewardGrid(int(args.grid or _solver_cfg(cfg).get("reward_grid", 1001)))
    rows = []
    if param == "R":
        scenario = _build_scenario(params)
        if scenario.info != "asymmetric":
            raise DomainError("reward sweeps need asymmetric info")
        for r in values:
            pt = acq.evaluate_asymmetric_reward(scenario, float(r))
            rows.append([r, pt.reward, pt.threshold, pt.success_prob, pt.expected_profit])
    else:
        for v in values:
            p = dict(params)
            if param == "delta":
                base = cost_model_from_config(p["cost_model_cfg"])
                if not isinstance(base, GaussianCosts):
                    raise DomainError("delta sweeps need a gaussian cost model")
                p["cost_model_cfg"] = {"kind": "gaussian",
                                       "params": {"mu": base.mu, "delta": float(v)}}
            elif param in ("N", "n0"):
                p["n_users" if param == "N" else "n_required"] = int(round(v))
            else:
                p["revenue"] = float(v)
            eq = acq.optimize_reward_asymmetric(_build_scenario(p), grid)
            gamma = eq.stage2.threshold if eq.stage2.threshold is not None else math.nan
            rows.append([v, eq.reward, gamma, eq.success_prob, eq.expected_profit])
    _emit_csv(["param", "R_star", "gamma_star", "success_prob", "expected_profit"],
              rows, args.out)
    return EXIT_OK


def cmd_acq_simulate(args) -> int:
    cfg = _load_config(args.config)
    params = _acq_params(cfg)
    scenario = _build_scenario(params)
    solver = _solver_cfg(cfg)
    slots = int(args.slots or solver.get("slots", 20))
    seed = int(args.seed if args.seed is not None else solver.get("seed", 0))
    if params["reward"] is not None:
        reward = float(params["reward"])
    else:
        grid = acq.RewardGrid(int(args.grid or solver.get("reward_grid", 1001)))
        reward = acq.optimize_reward_asymmetric(scenario, grid).reward
    run = sim.simulate_acquisition(scenario, reward, slots, seed)
    rows = [[s, run.collaborators[s], bool(run.success[s]), run.realized_profit[s]]
            for s in range(slots)]
    _emit_csv(["slot", "n_collaborators", "success", "realized_profit"], rows, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# contract subcommands
# ---------------------------------------------------------------------------

def cmd_contract_solve(args) -> int:
    cfg = _load_config(args.config)
    profile = _profile_from_config(cfg)
    if profile.counts is not None:
        sol = ct.solve_complete_contract(profile)
        extra = {}
    else:
        sol = ct.solve_incomplete_contract(profile)
        extra = {
            "kkt_residual": sol.diagnostics["kkt_residual"],
            "kkt_lambda": sol.diagnostics["lambda"],
            "kkt_v": sol.diagnostics["v"],
        }
    payload = {
        "items": [[it.reward, it.task] for it in sol.contract.items],
        "involved": list(sol.involved),
        "per_type_payoff": sol.payoffs,
        "expected_profit": sol.expected_profit,
        **extra,
    }
    _emit_json(payload, args.out)
    return EXIT_OK


def cmd_contract_check(args) -> int:
    with open(args.contract, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    try:
        contract = ct.Contract(tuple(ct.ContractItem(float(r), float(t))
                                     for r, t in doc["items"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise DomainError(f"malformed contract file: {exc}") from exc
    if args.costs:
        unit_costs = tuple(float(x) for x in args.costs.split(","))
    elif args.config:
        unit_costs = _profile_from_config(_load_config(args.config)).unit_costs
    else:
        raise DomainError("contract check needs --costs or --config")
    report = ct.check_feasibility(contract, unit_costs)
    payload = {"feasible": report.feasible, "violations": report.violations}
    _emit_json(payload, args.out)
    return EXIT_OK if report.feasible else EXIT_VERDICT


def _sweep_param_target(name: str, profile: ct.UserTypeProfile):
    for prefix, attr in (("K", "unit_costs"), ("theta", "weights"), ("tbar", "capacities")):
        if name.startswith(prefix) and name[len(prefix):].isdigit():
            idx = int(name[len(prefix):]) - 1
            if not 0 <= idx < profile.n_types:
                raise DomainError(f"type index out of range in {name!r}")
            return attr, idx
    raise DomainError(f"unknown contract sweep param {name!r} (use K2, theta1, tbar3, ...)")


def cmd_contract_sweep(args) -> int:
    cfg = _load_config(args.config)
    profile = _profile_from_config(cfg)
    sweep_cfg = cfg.get("sweep", {})
    counts_grid = args.counts_grid or sweep_cfg.get("counts_grid")
    param = args.param or sweep_cfg.get("param")
    if counts_grid is not None and param:
        raise DomainError("give either --param or --counts-grid, not both")
    if counts_grid is not None:
        return _contract_counts_grid(args, cfg, profile, counts_grid)
    range_spec = args.range or sweep_cfg.get("range")
    if not param or not range_spec:
        raise DomainError("contract sweep needs --param/--range or --counts-grid")
    attr, idx = _sweep_param_target(param, profile)
    values = _parse_range(range_spec)
    n = profile.n_types
    header = (["param"] + [f"t{i + 1}" for i in range(n)] + [f"r{i + 1}" for i in range(n)]
              + ["expected_profit", "involved"])
    rows = []
    for v in values:
        vec = list(getattr(profile, attr))
        vec[idx] = float(v)
        kwargs = {"unit_costs": tuple(profile.unit_costs),
                  "weights": tuple(profile.weights),
                  "capacities": tuple(profile.capacities),
                  attr: tuple(vec)}
        if profile.counts is not None:
            p = ct.UserTypeProfile(**kwargs, counts=profile.counts)
            sol = ct.solve_complete_contract(p)
        else:
            p = ct.UserTypeProfile(**kwargs, population=profile.population,
                                   type_probs=profile.type_probs)
            sol = ct.solve_incomplete_contract(p)
        rows.append([v, *sol.contract.tasks, *sol.contract.rewards,
                     sol.expected_profit, ";".join(str(i) for i in sol.involved)])
    _emit_csv(header, rows, args.out)
    return EXIT_OK


def _contract_counts_grid(args, cfg, profile, counts_grid) -> int:
    if profile.type_probs is None:
        raise DomainError("counts-grid sweeps need a probabilistic population")
    if isinstance(counts_grid, str):
        parts = counts_grid.split(",")
    else:
        parts = list(counts_grid)
    try:
        i, j = (int(p) - 1 for p in parts)
    except (TypeError, ValueError) as exc:
        raise DomainError("counts-grid wants two 1-based type indices, e.g. '1,3'") from exc
    if profile.n_types != 3 or i == j or not (0 <= i < 3 and 0 <= j < 3):
        raise DomainError("counts-grid sweeps support exactly 3 types and two distinct indices")
    rest = next(k for k in range(3) if k not in (i, j))
    step = int(args.count_step or cfg.get("sweep", {}).get("count_step", 1))
    if step < 1:
        raise DomainError("count-step must be >= 1")
    sol = ct.solve_incomplete_contract(profile)
    n_pop = profile.population
    weights = np.asarray(profile.weights)
    rows = []
    for a in range(0, n_pop + 1, step):
        for b in range(0, n_pop - a + 1, step):
            counts = [0, 0, 0]
            counts[i], counts[j], counts[rest] = a, b, n_pop - a - b
            inc = ct.realized_profit(sol.contract, counts, weights)
            _, _, comp = ct.complete_items_for_counts(
                counts, profile.unit_costs, profile.weights, profile.capacities)
            ratio = inc / comp if comp > 0 else math.nan
            agg = ct.aggregate_user_payoff(sol, counts)
            rows.append([a, b, counts[rest], inc, comp, ratio, agg])
    header = [f"n{i + 1}", f"n{j + 1}", f"n{rest + 1}",
              "realized_incomplete", "realized_complete", "ratio", "aggregate_payoff"]
    _emit_csv(header, rows, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify suites
# ---------------------------------------------------------------------------

def _verify_acq_ne(rng: np.random.Generator, instances: int) -> tuple[int, list[str]]:
    failures = []
    for case in range(instances):
        n = int(rng.integers(2, 7))
        costs = np.round(rng.uniform(0.1, 3.0, size=n), 6)
        n0 = int(rng.integers(1, n))
        v = float(np.round(rng.uniform(0.0, 2.0 * n0 * costs.max()), 6))
        model = "A" if rng.integers(2) == 0 else "B"
        scenario = acq.AcquisitionScenario.complete(tuple(costs), n0, v, model)
        eq = acq.solve_complete(scenario)
        predicted = [0] * n
        for idx in (eq.stage2.collaborators or ()):
            predicted[idx] = 1
        ne_set = oracles.enumerate_pure_ne(costs, eq.reward, n0, model)
        if tuple(predicted) not in set(ne_set):
            failures.append(
                f"case {case}: costs={costs.tolist()} n0={n0} V={v} model={model} "
                f"R*={eq.reward} predicted={predicted} not among {len(ne_set)} NEs")
    return instances, failures


def _random_contract(rng: np.random.Generator, n_types: int,
                     force_feasible: bool) -> tuple[np.ndarray, ct.Contract]:
    k = np.sort(rng.uniform(0.1, 3.0, size=n_types))[::-1]
    while np.any(np.diff(k) >= 0):
        k = np.sort(rng.uniform(0.1, 3.0, size=n_types))[::-1]
    if force_feasible:
        t = np.sort(rng.uniform(0.0, 2.0, size=n_types))
        r = np.empty(n_types)
        r[0] = k[0] * t[0]
        for i in range(1, n_types):
            # random reward inside the Condition(<=) sandwich
            lo = r[i - 1] + k[i] * (t[i] - t[i - 1])
            hi = r[i - 1] + k[i - 1] * (t[i] - t[i - 1])
            r[i] = rng.uniform(lo, hi)
    else:
        t = rng.uniform(0.0, 2.0, size=n_types)
        r = rng.uniform(0.0, 4.0, size=n_types)
    return k, ct.Contract.from_arrays(r, t)


def _verify_contract_feas(rng: np.random.Generator, instances: int) -> tuple[int, list[str]]:
    failures = []
    for case in range(instances):
        n_types = int(rng.integers(1, 6))
        k, contract = _random_contract(rng, n_types, force_feasible=case % 3 == 0)
        verdict = ct.check_feasibility(contract, k).feasible
        truth = not oracles.enumerate_ir_ic(contract, k)
        if verdict != truth:
            failures.append(f"case {case}: K={k.tolist()} items={contract.items} "
                            f"conditions say {verdict}, enumeration says {truth}")
    return instances, failures


def _verify_contract_grid(rng: np.random.Generator, instances: int) -> tuple[int, list[str]]:
    failures = []
    for case in range(instances):
        k2 = float(rng.uniform(0.2, 1.5))
        k1 = float(k2 + rng.uniform(0.1, 1.5))
        theta = float(rng.uniform(0.5, 5.0))
        q1 = float(rng.uniform(0.2, 0.8))
        n_pop = int(rng.integers(2, 11))
        profile = ct.UserTypeProfile.with_probabilities(
            (k1, k2), (theta, theta), (10.0, 10.0), n_pop, (q1, 1.0 - q1))
        sol = ct.solve_incomplete_contract(profile)
        _, _, oracle_profit = oracles.grid_contract_oracle(profile)
        if not sol.expected_profit >= oracle_profit - 1e-3:
            failures.append(f"case {case}: solver {sol.expected_profit} vs "
                            f"grid {oracle_profit}")
        if abs(sol.expected_profit - oracle_profit) > 1e-3:
            failures.append(f"case {case}: |solver - grid| = "
                            f"{abs(sol.expected_profit - oracle_profit)} > 1e-3")
    return instances, failures


def _verify_prob(rng: np.random.Generator, instances: int) -> tuple[int, list[str]]:
    failures = []
    for case in range(instances):
        trials = int(rng.integers(0, 201))
        p = float(rng.uniform(0.0, 1.0))
        spec = BinomialSpec(trials, p)
        pmf = binom_pmf_vector(spec)
        if abs(pmf.sum() - 1.0) > 1e-10:
            failures.append(f"case {case}: pmf sum {pmf.sum()} for {spec}")
        thr = int(rng.integers(0, trials + 2))
        head = float(pmf[:thr].sum())
        if abs(binom_tail(spec, thr) + head - 1.0) > 1e-10:
            failures.append(f"case {case}: tail+head != 1 for {spec}, thr={thr}")
        total = int(rng.integers(0, 8))
        bins = int(rng.integers(1, 5))
        comps = list(multinomial_compositions(total, bins))
        if len(comps) != composition_count(total, bins):
            failures.append(f"case {case}: composition count mismatch {total},{bins}")
        q = rng.dirichlet(np.ones(bins))
        mass = math.fsum(multinomial_pmf(c, q) for c in comps)
        if abs(mass - 1.0) > 1e-10:
            failures.append(f"case {case}: multinomial mass {mass}")
    return instances, failures


_SUITES = {
    "acq-ne": (_verify_acq_ne, 1000),
    "contract-feas": (_verify_contract_feas, 10000),
    "contract-grid": (_verify_contract_grid, 20),
    "prob": (_verify_prob, 200),
}


def cmd_verify(args) -> int:
    runner, default_n = _SUITES[args.suite]
    instances = int(args.instances or default_n)
    seed = int(args.seed if args.seed is not None else 0)
    rng = np.random.default_rng(seed)
    ran, failures = runner(rng, instances)
    status = "PASS" if not failures else "FAIL"
    print(f"{status} suite={args.suite} instances={ran} "
          f"mismatches={len(failures)} seed={seed} backend={active_backend()}")
    for line in failures[:20]:
        print(f"  {line}")
    return EXIT_OK if not failures else EXIT_VERDICT


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="collabmech",
        description="Solvers for reward-based data acquisition and screening contracts")
    sub = parser.add_subparsers(dest="command", required=True)

    p_acq = sub.add_parser("acq", help="threshold-revenue reward game")
    acq_sub = p_acq.add_subparsers(dest="subcommand", required=True)
    for name in ("solve", "sweep", "simulate"):
        p = acq_sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--out")
        p.add_argument("--grid", type=int, help="Stage-I reward grid points")
        if name == "sweep":
            p.add_argument("--param", choices=["R", "delta", "N", "n0", "V"])
            p.add_argument("--range", help="start:stop:count")
        if name == "simulate":
            p.add_argument("--slots", type=int)
            p.add_argument("--seed", type=int)

    p_ct = sub.add_parser("contract", help="screening-contract design")
    ct_sub = p_ct.add_subparsers(dest="subcommand", required=True)
    p = ct_sub.add_parser("solve")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p = ct_sub.add_parser("check")
    p.add_argument("--contract", required=True, help="JSON file with items [[r, t], ...]")
    p.add_argument("--costs", help="comma-separated unit costs K1,K2,...")
    p.add_argument("--config", help="config whose contract section provides K")
    p.add_argument("--out")
    p = ct_sub.add_parser("sweep")
    p.add_argument("--config", required=True)
    p.add_argument("--param", help="K2, theta1, tbar3, ...")
    p.add_argument("--range", help="start:stop:count")
    p.add_argument("--counts-grid", dest="counts_grid", help="two 1-based type indices, e.g. 1,2")
    p.add_argument("--count-step", dest="count_step", type=int)
    p.add_argument("--out")

    p_verify = sub.add_parser("verify", help="randomized oracle-agreement suites")
    p_verify.add_argument("suite", choices=sorted(_SUITES))
    p_verify.add_argument("--seed", type=int)
    p_verify.add_argument("--instances", type=int)
    return parser


_DISPATCH = {
    ("acq", "solve"): cmd_acq_solve,
    ("acq", "sweep"): cmd_acq_sweep,
    ("acq", "simulate"): cmd_acq_simulate,
    ("contract", "solve"): cmd_contract_solve,
    ("contract", "check"): cmd_contract_check,
    ("contract", "sweep"): cmd_contract_sweep,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            return cmd_verify(args)
        return _DISPATCH[(args.command, args.subcommand)](args)
    except (DomainError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())

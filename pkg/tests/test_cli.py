import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from collabmech.cli import main

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def write(tmp_path: Path, name: str, payload: dict) -> str:
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def symmetric_cfg(tmp_path, v=10.0):
    return write(tmp_path, "sym.json", {
        "acquisition": {"N": 5, "n0": 3, "V": v, "model": "A", "info": "symmetric",
                        "cost_model": {"kind": "gaussian",
                                       "params": {"mu": 2.0, "delta": 0.5}}}})


def complete_cfg(tmp_path):
    return write(tmp_path, "complete.json", {
        "acquisition": {"N": 4, "n0": 2, "V": 10.0, "model": "A", "info": "complete",
                        "cost_model": {"kind": "known",
                                       "params": {"costs": [1, 2, 3, 4]}}}})


class TestAcqSolve:
    def test_symmetric_reference_output(self, tmp_path, capsys):
        assert main(["acq", "solve", "--config", symmetric_cfg(tmp_path)]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["R_star"] == 6.0
        assert out["expected_profit"] == 4.0

    def test_complete_from_cost_file(self, tmp_path, capsys):
        assert main(["acq", "solve", "--config", complete_cfg(tmp_path)]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["R_star"] == 4.0
        assert out["stage2"]["collaborators"] == [0, 1]

    def test_zero_revenue(self, tmp_path, capsys):
        cfg = write(tmp_path, "zero.json", {
            "acquisition": {"N": 5, "n0": 2, "V": 0.0, "info": "asymmetric",
                            "cost_model": {"kind": "uniform", "params": {"b": 4.0}}},
            "solver": {"reward_grid": 21}})
        assert main(["acq", "solve", "--config", cfg]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["R_star"] == 0.0 and out["expected_profit"] == 0.0

    def test_malformed_config_exits_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert main(["acq", "solve", "--config", str(bad)]) == 2
        cfg = write(tmp_path, "both.json", {"acquisition": {}, "contract": {}})
        assert main(["acq", "solve", "--config", cfg]) == 2
        assert main(["acq", "solve", "--config", str(tmp_path / "missing.json")]) == 2


class TestAcqSweep:
    def test_fig2_reward_sweep_row(self, tmp_path, capsys):
        rc = main(["acq", "sweep", "--config", str(CONFIG_DIR / "fig2.json"),
                   "--param", "R", "--range", "95:105:11"])
        assert rc == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "param,R_star,gamma_star,success_prob,expected_profit"
        row = next(l for l in lines[1:] if l.startswith("100,"))
        gamma = float(row.split(",")[2])
        assert abs(gamma - 2.0) < 0.05

    def test_config_sweep_section_used_as_default(self, tmp_path, capsys):
        cfg = write(tmp_path, "s.json", {
            "acquisition": {"N": 10, "n0": 4, "V": 20.0, "info": "asymmetric",
                            "cost_model": {"kind": "uniform", "params": {"b": 4.0}}},
            "sweep": {"param": "R", "range": "5:15:3"}})
        assert main(["acq", "sweep", "--config", cfg]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 4

    def test_empty_range_exits_2(self, tmp_path):
        assert main(["acq", "sweep", "--config", symmetric_cfg(tmp_path),
                     "--param", "R", "--range", "1:2:0"]) == 2

    def test_unknown_param_rejected_by_parser(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["acq", "sweep", "--config", symmetric_cfg(tmp_path),
                  "--param", "sigma", "--range", "1:2:3"])
        assert exc.value.code == 2

    def test_delta_sweep_csv(self, tmp_path, capsys):
        cfg = write(tmp_path, "delta.json", {
            "acquisition": {"N": 20, "n0": 14, "V": 60.0, "info": "asymmetric",
                            "cost_model": {"kind": "gaussian",
                                           "params": {"mu": 3.0, "delta": 1.0}}}})
        assert main(["acq", "sweep", "--config", cfg, "--param", "delta",
                     "--range", "0.5:1.5:3", "--grid", "201"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 4
        assert all(len(l.split(",")) == 5 for l in lines)

    def test_delta_sweep_needs_gaussian(self, tmp_path):
        cfg = write(tmp_path, "u.json", {
            "acquisition": {"N": 10, "n0": 4, "V": 20.0, "info": "asymmetric",
                            "cost_model": {"kind": "uniform", "params": {"b": 4.0}}}})
        assert main(["acq", "sweep", "--config", cfg, "--param", "delta",
                     "--range", "0.5:1.5:3"]) == 2

    def test_deterministic_bytes(self, tmp_path):
        cfg = write(tmp_path, "d.json", {
            "acquisition": {"N": 10, "n0": 4, "V": 20.0, "info": "asymmetric",
                            "cost_model": {"kind": "uniform", "params": {"b": 4.0}}}})
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        for out in (out1, out2):
            assert main(["acq", "sweep", "--config", cfg, "--param", "R",
                         "--range", "4:16:7", "--out", str(out)]) == 0
        assert out1.read_bytes() == out2.read_bytes()


class TestAcqSimulate:
    def test_csv_shape_and_reproducibility(self, tmp_path):
        cfg = write(tmp_path, "sim.json", {
            "acquisition": {"N": 20, "n0": 8, "V": 50.0, "R": 30.0,
                            "info": "asymmetric",
                            "cost_model": {"kind": "uniform", "params": {"b": 4.0}}}})
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for out in (a, b):
            assert main(["acq", "simulate", "--config", cfg, "--slots", "12",
                         "--seed", "99", "--out", str(out)]) == 0
        assert a.read_bytes() == b.read_bytes()
        lines = a.read_text().strip().splitlines()
        assert lines[0] == "slot,n_collaborators,success,realized_profit"
        assert len(lines) == 13

    def test_degenerate_costs_all_succeed(self, tmp_path, capsys):
        cfg = write(tmp_path, "deg.json", {
            "acquisition": {"N": 10, "n0": 2, "V": 100.0, "R": 35.0,
                            "info": "asymmetric",
                            "cost_model": {"kind": "gaussian",
                                           "params": {"mu": 3.0, "delta": 0.0}}}})
        assert main(["acq", "simulate", "--config", cfg, "--slots", "6",
                     "--seed", "1"]) == 0
        rows = capsys.readouterr().out.strip().splitlines()[1:]
        assert all(row.split(",")[2] == "1" for row in rows)


class TestContractCommands:
    def test_fig7_solve_structure(self, capsys):
        assert main(["contract", "solve", "--config",
                     str(CONFIG_DIR / "fig7.json")]) == 0
        out = json.loads(capsys.readouterr().out)
        items = out["items"]
        assert len(items) == 3
        rewards = [it[0] for it in items]
        tasks = [it[1] for it in items]
        assert rewards == sorted(rewards) and tasks == sorted(tasks)
        assert out["involved"] == [0, 1, 2]
        assert out["kkt_residual"] <= 1e-8

    def test_single_type_closed_form(self, tmp_path, capsys):
        cfg = write(tmp_path, "one.json", {
            "contract": {"K": [1.0], "theta": [5.0], "t_bar": [2.0],
                         "population": {"counts": [4]}}})
        assert main(["contract", "solve", "--config", cfg]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["items"] == [[1.0, 1.0]]
        assert out["expected_profit"] == pytest.approx(5 * math.log(5) - 4, rel=1e-9)

    def test_unprofitable_types_empty_contract(self, tmp_path, capsys):
        cfg = write(tmp_path, "none.json", {
            "contract": {"K": [2.0, 1.5], "theta": [1.0, 1.0], "t_bar": [5.0, 5.0],
                         "population": {"N": 10, "q": [0.5, 0.5]}}})
        assert main(["contract", "solve", "--config", cfg]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["involved"] == []
        assert out["items"] == [[0.0, 0.0], [0.0, 0.0]]

    def test_equal_costs_exit_2(self, tmp_path):
        cfg = write(tmp_path, "eq.json", {
            "contract": {"K": [1.0, 1.0], "theta": [5.0, 5.0], "t_bar": [5.0, 5.0],
                         "population": {"N": 10, "q": [0.5, 0.5]}}})
        assert main(["contract", "solve", "--config", cfg]) == 2

    def test_check_exit_codes(self, tmp_path, capsys):
        ok = write(tmp_path, "ok.json", {"items": [[2, 1], [3, 2]]})
        bad = write(tmp_path, "bad.json", {"items": [[2, 1], [5, 2]]})
        assert main(["contract", "check", "--contract", ok, "--costs", "2,1"]) == 0
        assert json.loads(capsys.readouterr().out)["feasible"] is True
        assert main(["contract", "check", "--contract", bad, "--costs", "2,1"]) == 1
        assert json.loads(capsys.readouterr().out)["feasible"] is False
        zero = write(tmp_path, "zero.json", {"items": [[0, 0], [0, 0]]})
        assert main(["contract", "check", "--contract", zero, "--costs", "2,1"]) == 0
        broken = tmp_path / "broken.json"
        broken.write_text("[[")
        assert main(["contract", "check", "--contract", str(broken),
                     "--costs", "2,1"]) == 2

    def test_param_sweep(self, tmp_path, capsys):
        cfg = write(tmp_path, "sweep.json", {
            "contract": {"K": [1.0, 0.5], "theta": [2.0, 3.0], "t_bar": [5.0, 5.0],
                         "population": {"N": 20, "q": [0.5, 0.5]}}})
        assert main(["contract", "sweep", "--config", cfg, "--param", "theta2",
                     "--range", "1.5:5:8"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "param,t1,t2,r1,r2,expected_profit,involved"
        t2 = [float(l.split(",")[2]) for l in lines[1:]]
        assert t2 == sorted(t2)

    def test_counts_grid(self, capsys):
        assert main(["contract", "sweep", "--config", str(CONFIG_DIR / "fig9.json"),
                     "--count-step", "40"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0].startswith("n1,n2,n3,")
        ratios = [float(l.split(",")[5]) for l in lines[1:] if l.split(",")[5] != "nan"]
        assert all(r <= 1 + 1e-9 for r in ratios)


class TestVerify:
    @pytest.mark.parametrize("suite,n", [("acq-ne", 50), ("contract-feas", 200),
                                         ("contract-grid", 3), ("prob", 20)])
    def test_suites_pass(self, suite, n, capsys):
        assert main(["verify", suite, "--instances", str(n), "--seed", "1"]) == 0
        assert capsys.readouterr().out.startswith("PASS")


class TestExitCodes:
    def test_numerical_failure_exits_3(self, tmp_path, monkeypatch):
        from collabmech import cli as cli_mod
        from collabmech.errors import NumericalError

        def boom(profile):
            raise NumericalError("synthetic non-convergence")

        monkeypatch.setattr(cli_mod.ct, "solve_incomplete_contract", boom)
        cfg = write(tmp_path, "c.json", {
            "contract": {"K": [1.0, 0.5], "theta": [3.0, 3.0], "t_bar": [5.0, 5.0],
                         "population": {"N": 10, "q": [0.5, 0.5]}}})
        assert main(["contract", "solve", "--config", cfg]) == 3


class TestEntryPoint:
    def test_console_script_help(self):
        proc = subprocess.run([sys.executable, "-m", "collabmech.cli", "--help"],
                              capture_output=True, text=True)
        assert proc.returncode == 0
        assert "acq" in proc.stdout and "contract" in proc.stdout

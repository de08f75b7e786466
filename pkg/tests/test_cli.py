import json
import subprocess
import sys

import pytest

from repalloc.cli import main, parse_set, parse_start
from repalloc.cli import InputError
from repalloc.game import golden_game

SMALL = ["--set", "n_users=8", "--set", "n_wifi=3"]


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_run_success_writes_csv(capsys, tmp_path):
    code, out, _ = run(capsys, "run", *SMALL, "--seed", "2", "--csv", "--out", str(tmp_path))
    assert code == 0
    rep = json.loads(out)
    assert rep["config"]["seed"] == 2 and rep["summary"]["converged"]
    lines = (tmp_path / "run_seed2.csv").read_text().splitlines()
    assert lines[0] == "iteration,active_users,learning_users,global_throughput"


def test_run_non_convergence_exit_2(capsys):
    code, _, err = run(capsys, "run", *SMALL, "--set", "step=\"CSS_L\"", "--set", "max_iters=10")
    assert code == 2
    assert "no convergence" in err


def test_run_plain_string_set_value(capsys):
    code, out, _ = run(capsys, "run", *SMALL, "--set", "step=CSS_M")
    assert code == 0
    assert json.loads(out)["config"]["step"] == "CSS_M"


@pytest.mark.parametrize("argv", [
    ["run", "--set", "policy=nope"],
    ["run", "--set", "n_users"],
    ["run", "--set", "bogus_key=1"],
    ["run", "--config", "/nonexistent/config.json"],
    ["optimize", "--topology", "/nonexistent/top.json"],
    ["optimize", "--topology", "fairness", "--method", "exhaustive"],
    ["dynamics", "--start", "0.5;abc"],
    ["dynamics", "--game", "no_such_game"],
    ["compare", "--policies", "nope"],
])
def test_invalid_exit_3(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 3
    assert err.startswith("error:")


def test_config_file(capsys, tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"n_users": 6, "n_wifi": 3, "seed": 7}))
    code, out, _ = run(capsys, "run", "--config", str(p), "--set", "seed=8")
    assert code == 0
    assert json.loads(out)["config"]["seed"] == 8
    code, out, _ = run(capsys, "run", "--config", str(p), "--set", "seed=8", "--seed", "9")
    assert json.loads(out)["config"]["seed"] == 9


def test_optimize_report_and_check(capsys, tmp_path):
    code, out, _ = run(capsys, "optimize", "--check", "efficient", "--csv", "--out", str(tmp_path))
    assert code == 0
    assert "certificate: local" in out
    assert "check efficient: objective 31.286000, locally optimal: yes" in out
    assert (tmp_path / "optimize.csv").read_text().startswith("user,choice,cell,throughput")


def test_optimize_reports_improving_move(capsys):
    code, out, _ = run(capsys, "optimize", "--alpha", "0", "--check", "fair", "--starts", "3")
    assert code == 0
    assert "locally optimal: no, improving switch user" in out


def test_optimize_exhaustive_on_file(capsys, tmp_path):
    p = tmp_path / "t.json"
    p.write_text(json.dumps({"wifi_cells": [1], "zones": [0, 0], "choice_sets": [[0, 1], [0, 1]]}))
    code, out, _ = run(capsys, "optimize", "--topology", str(p), "--method", "exhaustive", "--check", "0,0")
    assert code == 0
    assert "certificate: global" in out
    assert "total throughput: 11.8250" in out
    assert "check 0,0: objective 9.580000, locally optimal: no" in out


def test_dynamics_counterexample(capsys, tmp_path):
    code, out, _ = run(capsys, "dynamics", "--game", "three_player", "--start", "0.5;0.5;0.5",
                       "--csv", "--out", str(tmp_path))
    assert code == 0
    rep = json.loads(out)
    assert rep["limit"] == "pure" and rep["profile"] == ["A", "A", "A"]
    assert rep["potential_monotone"]
    assert (tmp_path / "trajectory.csv").exists()


def test_dynamics_undecided_exit_2(capsys):
    code, out, _ = run(capsys, "dynamics", "--game", "two_by_three", "--horizon", "0.5")
    assert code == 2
    assert json.loads(out)["limit"] == "undecided"


def test_dynamics_game_file(capsys, tmp_path):
    p = tmp_path / "g.json"
    p.write_text(json.dumps({"players": 1, "actions": [["A", "B"]], "payoffs": [[1], [2]]}))
    code, out, _ = run(capsys, "dynamics", "--game", str(p))
    assert code == 0
    assert json.loads(out)["profile"] == ["B"]


def test_compare_policies(capsys, tmp_path):
    code, out, _ = run(capsys, "compare", *SMALL, "--seeds", "2", "--csv", "--out", str(tmp_path))
    assert code == 0
    rep = json.loads(out)
    assert set(rep["variants"]) == {"algorithm", "throughput_payoff", "gan_wifi_first", "selfish_best"}
    assert rep["variants"]["gan_wifi_first"]["handovers"] == 0
    rows = (tmp_path / "compare_policies.csv").read_text().splitlines()
    assert rows[0] == "seed,variant,throughput,converged,iterations,handovers"
    assert len(rows) == 1 + 2 * 4


def test_compare_steps(capsys):
    code, out, _ = run(capsys, "compare", *SMALL, "--mode", "steps", "--seeds", "2", "--policies", "CUS", "CSS_M")
    assert code == 0
    assert list(json.loads(out)["variants"]) == ["CUS", "CSS_M"]


def test_compare_mice(capsys):
    code, out, _ = run(capsys, "compare", *SMALL, "--mode", "mice", "--seeds", "1",
                       "--set", "dynamic=true", "--set", "horizon=2000", "--set", "warmup=200",
                       "--set", "arrival_rate=0.05", "--set", "mean_workload=500", "--set", "mice_fraction=0.9")
    assert code == 0
    rep = json.loads(out)
    assert list(rep["variants"]) == ["all_learn", "mice_wifi"]


def test_plot_outputs(capsys, tmp_path):
    pytest.importorskip("matplotlib")
    assert main(["run", *SMALL, "--plot", "--out", str(tmp_path)]) == 0
    assert main(["dynamics", "--plot", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "run_seed0.png").stat().st_size > 0
    assert (tmp_path / "trajectory.png").stat().st_size > 0


def test_parse_helpers():
    assert parse_set(["a=1", "b=x", "c=[1,2]"]) == {"a": 1, "b": "x", "c": [1, 2]}
    g = golden_game("two_by_three")
    q = parse_start("0.5;1/3,1/3", g.action_sets)
    assert q[1].tolist() == pytest.approx([1 / 3, 1 / 3, 1 / 3])
    with pytest.raises(InputError):
        parse_start("0.5", g.action_sets)


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "repalloc.cli", "run", "--set", "policy=x"],
                       capture_output=True, text=True)
    assert r.returncode == 3

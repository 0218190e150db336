from __future__ import annotations

import os
import subprocess
import sys

import pytest

from crowdship.bench import GeneratorConfig, generate_slice
from crowdship.cli import main
from crowdship.model import load_solution, save_instance, validate_solution
from crowdship.oracle import exhaustive_optimum
from crowdship.orchestrator import parse_report

from tiny import tiny_instance


@pytest.fixture
def generated(tmp_path):
    inst = generate_slice(GeneratorConfig(master_seed=1), tasks=[30], ratios=[0.1],
                          patterns=["m1"], bases=[0])[0]
    path = tmp_path / "inst.txt"
    save_instance(inst, path)
    return inst, path


def test_generate_full_library(tmp_path):
    out = tmp_path / "lib"
    assert main(["generate", "--out-dir", str(out), "--master-seed", "7"]) == 0
    assert len(os.listdir(out)) == 1600


def test_generate_small_library(tmp_path):
    out = tmp_path / "lib"
    code = main(["generate", "--out-dir", str(out), "--n-full-instances", "1", "--task-sizes", "30",
                 "--driver-ratios", "0.1,0.2"])
    assert code == 0
    assert len(os.listdir(out)) == 16


def test_solve_writes_solution_and_report(tmp_path, generated, capsys):
    inst, path = generated
    sol_path, rep_path, js = tmp_path / "s.txt", tmp_path / "r.txt", tmp_path / "r.json"
    code = main(["solve", "--variant", "e-ddc", "--instance", str(path), "--out", str(sol_path),
                 "--report", str(rep_path), "--json", str(js), "--time-limit", "600", "--seed", "1"])
    assert code == 0
    sol = load_solution(sol_path)
    assert validate_solution(inst, sol) == []
    kv = parse_report(rep_path.read_text())
    assert kv["variant"] == "E-DDC" and kv["status"] == "optimal"
    assert float(kv["objective"]) == sol.objective
    assert "objective" in capsys.readouterr().out


def test_gaps_and_sensitivity(tmp_path, generated, capsys):
    inst, path = generated
    jsons = []
    for v in ("h-dd", "seq"):
        js = tmp_path / f"{v}.json"
        assert main(["solve", "--variant", v, "--instance", str(path), "--out", str(tmp_path / f"{v}.sol"),
                     "--json", str(js)]) == 0
        jsons.append(str(js))
    capsys.readouterr()
    assert main(["gaps", *jsons]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("instance\tvariant") and len(lines) == 3
    table = tmp_path / "sens.tsv"
    code = main(["sensitivity", "--instance", str(path), "--solution", str(tmp_path / "h-dd.sol"),
                 "--group-by", "class,pattern", "--out", str(table)])
    assert code == 0
    assert table.read_text().splitlines()[0].startswith("class\tpattern\toffers")


def test_oracle_subcommand(tmp_path, capsys):
    inst = tiny_instance(3)
    path = tmp_path / "tiny.txt"
    save_instance(inst, path)
    assert main(["oracle", "--instance", str(path), "--out", str(tmp_path / "o.txt")]) == 0
    printed = float(capsys.readouterr().out.strip())
    assert printed == exhaustive_optimum(inst).objective
    assert load_solution(tmp_path / "o.txt").objective == printed


def test_oracle_refuses_large_instances(generated, capsys):
    _, path = generated
    assert main(["oracle", "--instance", str(path)]) == 2
    assert "at most" in capsys.readouterr().err


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["frobnicate"],
        ["solve", "--variant", "x-y", "--instance", "a", "--out", "b"],
        ["solve", "--instance", "a", "--out", "b"],
        ["generate", "--out-dir", "x", "--bogus"],
        ["generate", "--out-dir", "x", "--task-sizes", "a,b"],
    ],
)
def test_usage_errors(argv, capsys):
    assert main(argv) == 1
    assert "error" in capsys.readouterr().err


def test_runtime_errors(tmp_path, capsys):
    assert main(["solve", "--variant", "h-dd", "--instance", str(tmp_path / "none.txt"),
                 "--out", str(tmp_path / "s.txt")]) == 2
    bad = tmp_path / "bad.txt"
    bad.write_text("not an instance\n")
    assert main(["oracle", "--instance", str(bad)]) == 2
    assert main(["generate", "--out-dir", str(tmp_path / "g"), "--task-sizes", "35"]) == 2


def test_time_limit_exit_code(tmp_path, generated):
    inst, path = generated
    out = tmp_path / "s.txt"
    code = main(["solve", "--variant", "e-dd", "--instance", str(path), "--out", str(out),
                 "--time-limit", "0"])
    assert code == 3
    assert validate_solution(inst, load_solution(out)) == []


def test_console_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "crowdship", "generate", "--out-dir", str(tmp_path / "g"),
                          "--n-full-instances", "1", "--task-sizes", "30", "--driver-ratios", "0.1"],
                         capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    assert "wrote 8 instances" in res.stdout

import json
import subprocess
import sys

import pytest

from rrselect.cli import main
from rrselect.core import load_instance


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_special_method_on_running_example(capsys):
    code, out, _ = run(capsys, "solve", "--method", "special", "builtin:ex1")
    assert code == 0
    assert "value 25" in out and "selection 1 3" in out


@pytest.mark.parametrize("method", ["brute", "m1", "m2"])
def test_solve_json(capsys, method):
    code, out, _ = run(capsys, "solve", "--method", method, "--json", "builtin:ex1")
    payload = json.loads(out)
    assert code == 0 and payload["value"] == 25 and payload["selection"] == [1, 3]


def test_trace(capsys):
    code, out, _ = run(capsys, "solve", "--method", "m1", "--trace", "builtin:ex1")
    assert "1: lb 19 ub 27" in out


def test_adversary_subcommand(capsys):
    code, out, _ = run(capsys, "adv", "builtin:ex1", "--x", "1,4", "--json")
    payload = json.loads(out)
    assert code == 0 and payload["value"] == 19 and payload["attacked"] == [4]
    code, out, _ = run(capsys, "adv", "builtin:ex1", "--x", "1,4", "--brute")
    assert "value 19" in out


def test_incremental_subcommand(capsys):
    code, out, _ = run(capsys, "inc", "builtin:ex1", "--x", "1,4", "--attack", "4")
    assert code == 0 and "value 19" in out and "recovery 1 3" in out


def test_generate_and_solve_file(capsys, tmp_path):
    path = tmp_path / "i2.txt"
    code, _, _ = run(capsys, "generate", "--family", "i2", "--K", "2", "--seed", "4", "-o", str(path))
    assert code == 0 and load_instance(path).K == 2
    code, out, _ = run(capsys, "solve", "--json", str(path))
    assert code == 0 and json.loads(out)["status"] == "optimal"
    code, out, _ = run(capsys, "generate", "--family", "reduction", "--A", "1,2,3")
    assert out.startswith("format-version: 1") and "gamma: 4" in out


def test_export(capsys, tmp_path):
    code, out, _ = run(capsys, "export", "builtin:ex1", "--formulation", "m1")
    assert code == 0 and out.startswith("\\ formulation: m1")
    target = tmp_path / "m3.lp"
    code, out, _ = run(capsys, "export", "builtin:ex1", "--formulation", "m3", "-o", str(target),
                       "--solve", "--solver",
                       f"{sys.executable} -m rrselect.highs_bridge {{model}} {{solution}}")
    assert code == 0 and target.exists() and "objective 25" in out


def test_experiment_and_plot(capsys, tmp_path):
    cfg = tmp_path / "exp.txt"
    cfg.write_text('format-version: 1\ninstances: ["builtin:ex1"]\nmethods: ["m1", "m2"]\n'
                   f'time_limit: 5\noutput: "{tmp_path / "out"}"\n')
    code, out, _ = run(capsys, "experiment", str(cfg), "--plot", "--json")
    payload = json.loads(out)
    assert code == 0 and payload["records"] == 2 and len(payload["plots"]) == 4
    code, out, _ = run(capsys, "plot", str(tmp_path / "out" / "results.csv"), "-o", str(tmp_path))
    assert code == 0 and "solved.svg" in out


def test_verify_quick(capsys):
    code, out, _ = run(capsys, "verify", "--quick")
    assert code == 0 and "FAIL" not in out


def test_exit_codes(capsys, tmp_path):
    assert run(capsys, "frobnicate")[0] == 1
    assert run(capsys, "adv", "builtin:ex1")[0] == 1
    code, _, err = run(capsys, "solve", "--method", "special", "builtin:ex2")
    assert code == 2 and "two items per part" in err
    assert run(capsys, "solve", str(tmp_path / "missing.txt"))[0] == 2
    assert run(capsys, "solve", "builtin:ex9")[0] == 2
    assert run(capsys, "adv", "builtin:ex1", "--x", "1,2")[0] == 2
    assert run(capsys, "--help")[0] == 0


def test_verification_failure_exit_code(capsys, monkeypatch):
    import rrselect.cli as cli
    from rrselect.verify import CheckResult
    monkeypatch.setattr(cli, "run_checks",
                        lambda quick, seed: [CheckResult("x", 1, ["seed 0: got 1, expected 2"])])
    assert run(capsys, "verify")[0] == 3


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "rrselect", "adv", "builtin:ex1", "--x", "1,4"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "value 19" in proc.stdout

import subprocess
import sys

import pytest

from rflab.cli import main


def parse_kv(line):
    return dict(item.split("=", 1) for item in line.split())


def test_counterexample(capsys):
    assert main(["counterexample"]) == 0
    out = capsys.readouterr().out.strip().splitlines()
    assert len(out) == 1
    kv = parse_kv(out[0])
    assert kv["ThreeMass"] == "25/18" and kv["FourMass"] == "25/32"


def test_missing_config_exit_2(capsys, tmp_path):
    path = str(tmp_path / "absent.ini")
    assert main(["budget", "--config", path]) == 2
    assert path in capsys.readouterr().err


def test_bad_config_value_exit_2(capsys, tmp_path):
    p = tmp_path / "c.ini"
    p.write_text("[ensemble]\nM = many\n")
    assert main(["underparam", "--config", str(p)]) == 2
    assert "ensemble.M" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [["counterexample", "--bogus"], ["nosuch"], [],
                                  ["counterexample", "--seed", "-1"], ["budget", "--threads", "0"]])
def test_usage_errors_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as info:
        main(argv)
    assert info.value.code == 2
    assert "usage" in capsys.readouterr().err


def test_computation_error_exit_1(capsys, tmp_path):
    # ReLU features that are inactive on every training point make Phi^T Phi singular
    p = tmp_path / "c.ini"
    p.write_text("[features]\nactivation = relu\nbias_augment = false\n"
                 "[ensemble]\nM = 200\nn_test = 2\n[kernel]\nn_mc_samples = 1000\n")
    assert main(["underparam", "--config", str(p)]) == 1
    assert "underparam" in capsys.readouterr().err


def test_seed_override_and_out(tmp_path, capsys):
    p = tmp_path / "c.ini"
    p.write_text("[experiment]\nseed = 3\n[ensemble]\nM = 40\nn_test = 3\n[kernel]\nn_mc_samples = 5000\n")
    out = tmp_path / "r.csv"
    assert main(["underparam", "--config", str(p), "--seed", "11", "--out", str(out), "--threads", "2"]) == 0
    kv = parse_kv(capsys.readouterr().out.strip())
    assert kv["out"] == str(out) and kv["experiment"] == "underparam"
    assert "# [experiment] seed = 11" in out.read_text().splitlines()


def test_selftest(capsys):
    assert main(["selftest"]) == 0
    kv = parse_kv(capsys.readouterr().out.strip())
    assert kv["selftest"] == "pass" and kv["failed"] == "0"


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "rflab", "counterexample"],
                       capture_output=True, text=True, timeout=60)
    assert r.returncode == 0 and "ThreeMass=25/18" in r.stdout

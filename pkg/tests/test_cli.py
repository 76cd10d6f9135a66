import json
import subprocess
import sys

import pytest

from itersplit import cli, verify
from itersplit.study import read_csv
from itersplit.verify import CheckResult


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def last_json(text):
    return json.loads(text.strip().splitlines()[-1])


class TestVerify:
    def test_all_checks_pass(self, capsys):
        code, out, _ = run(["verify"], capsys)
        assert code == cli.EXIT_OK
        lines = out.strip().splitlines()
        assert len(lines) == 6 and all(ln.startswith("PASS") for ln in lines)

    def test_selected_check(self, capsys):
        code, out, _ = run(["verify", "--check", "gammas", "--check", "phi1-small"], capsys)
        assert code == 0 and len(out.strip().splitlines()) == 2

    def test_failing_check_exit_code(self, capsys, monkeypatch):
        monkeypatch.setitem(verify.CHECKS, "gammas", lambda: CheckResult("gammas", False, "forced"))
        code, out, err = run(["verify", "--check", "gammas"], capsys)
        assert code == cli.EXIT_VERIFY
        assert out.startswith("FAIL")
        assert last_json(err) == {"error": "VERIFY", "failed": ["gammas"]}

    def test_unknown_check(self, capsys):
        code, _, err = run(["verify", "--check", "nope"], capsys)
        assert code == cli.EXIT_CONFIG and last_json(err)["error"] == "CONFIG"


class TestStudy:
    def test_toy_strang_to_file_with_plot(self, capsys, tmp_path):
        out, gp = tmp_path / "toy.csv", tmp_path / "toy.gp"
        code, stdout, err = run(
            ["study", "--problem", "toy-ode", "--scheme", "strang", "--out", str(out), "--plot", str(gp), "--threads", "2"],
            capsys,
        )
        assert code == 0 and stdout == ""
        res = read_csv(out)
        assert len(res.rows) == cli.DEFAULT_TAU_COUNT
        assert res.fitted_order == pytest.approx(2.0, abs=0.1)
        assert last_json(err)["fitted_order"] == res.fitted_order
        assert str(out) in gp.read_text()

    def test_csv_on_stdout(self, capsys):
        code, stdout, _ = run(["study", "--problem", "toy-ode", "--scheme", "iter-triple-jump", "--tau-count", "4"], capsys)
        assert code == 0
        assert stdout.splitlines()[0].startswith("tau,error")
        assert any(ln.startswith("# fitted_order=") for ln in stdout.splitlines())

    def test_tau_range(self, capsys, tmp_path):
        out = tmp_path / "r.csv"
        code, _, _ = run(
            ["study", "--problem", "toy-ode", "--scheme", "lie", "--tau-max", "0.0078125", "--tau-min", "0.0009765625", "--out", str(out)],
            capsys,
        )
        assert code == 0
        assert [r.tau for r in read_csv(out).rows] == [0.0078125 / 2**j for j in range(4)]

    def test_real_triple_jump_on_brusselator_is_unstable(self, capsys):
        code, stdout, err = run(["study", "--problem", "brusselator", "--scheme", "triple-jump", "--coeffs", "real"], capsys)
        assert code == cli.EXIT_NUMERICAL
        payload = last_json(err)
        assert payload["error"] == "UNSTABLE" and payload["step"] == 0
        assert stdout == ""

    @pytest.mark.parametrize(
        "extra",
        [
            ["--tau-count", "3"],
            ["--tau-max", "0.3"],
            ["--iterations", "0"],
            ["--inner-tol", "-1"],
            ["--ref-factor", "5", "--tmax", "0.5"],
            ["--n", "12"],
        ],
    )
    def test_config_errors(self, capsys, extra):
        code, _, err = run(["study", "--problem", "toy-ode", "--scheme", "strang", *extra], capsys)
        assert code == cli.EXIT_CONFIG
        assert last_json(err)["error"] == "CONFIG"


class TestRun:
    def test_json_report(self, capsys):
        code, out, _ = run(["run", "--problem", "kdv-soliton", "--scheme", "strang", "--n", "256", "--tmax", "0.1", "--tau", "0.0125"], capsys)
        assert code == 0
        rep = json.loads(out)
        assert rep["problem"] == "kdv-soliton" and rep["norm"] == "l2"
        assert 0 < rep["error"] < 0.1 and rep["iterations"] == 8

    def test_default_step(self, capsys):
        code, out, _ = run(["run", "--problem", "toy-ode", "--scheme", "iter-strang", "--iterations", "2"], capsys)
        rep = json.loads(out)
        assert code == 0 and rep["tau"] == 0.5 / 16 and rep["iterations"] == 32

    def test_divergence_exit(self, capsys):
        code, _, err = run(["run", "--problem", "toy-ode", "--scheme", "iter-strang", "--tau", "2.5", "--tmax", "2.5"], capsys)
        assert code == cli.EXIT_NUMERICAL and last_json(err)["error"] == "DIVERGENCE"


class TestParser:
    def test_bad_flag(self, capsys):
        code, _, err = run(["study", "--problem", "toy-ode", "--scheme", "strang", "--bogus"], capsys)
        assert code == cli.EXIT_CONFIG and last_json(err)["error"] == "CONFIG"

    def test_unknown_problem(self, capsys):
        code, _, _ = run(["run", "--problem", "heat", "--scheme", "strang"], capsys)
        assert code == cli.EXIT_CONFIG

    def test_help_lists_defaults(self, capsys):
        code, out, _ = run(["study", "--help"], capsys)
        assert code == 0
        for token in ["brusselator: tmax=0.25 n=128", "kdv-schwartz", "T/2^9", "tau-count=6", "exit codes"]:
            assert token in out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "itersplit", "verify", "--check", "gammas"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("PASS")

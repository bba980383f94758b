import csv
import json
import os
import subprocess
import sys

import pytest

from fvie.cli import RunConfig, UsageError, main, parse_config, read_config_file

FAST = ["--grid-N", "10"]


def run_cli(args, capsys=None):
    code = main(args)
    if capsys is not None:
        out, err = capsys.readouterr()
        return code, out, err
    return code


def nonincreasing(errors, floor=1e-12):
    """Nonincreasing once errors are above the rounding floor."""
    return all(b <= max(a, floor) for a, b in zip(errors, errors[1:]))


class TestParse:
    def test_basic(self):
        cfg = parse_config(["solve", "--problem", "crisp-unit-linear", "--N", "4"])
        assert cfg == RunConfig(command="solve", problem="crisp-unit-linear", N=4)

    def test_flag_overrides_file(self, tmp_path):
        f = tmp_path / "run.cfg"
        f.write_text("# comment\nN = 8\nproblem=fuzzy-unit-linear  # trailing\nquad-N=12\n")
        cfg = parse_config(["solve", "--config", str(f), "--N", "4"])
        assert (cfg.N, cfg.problem, cfg.quad_N) == (4, "fuzzy-unit-linear", 12)

    def test_unknown_key_named(self, tmp_path):
        f = tmp_path / "run.cfg"
        f.write_text("N=4\nbogus_key = 1\n")
        with pytest.raises(UsageError, match="bogus_key"):
            read_config_file(f)

    @pytest.mark.parametrize("argv", [
        ["solve", "--problem", "crisp-unit-linear", "--N", "-1"],
        ["solve", "--problem", "crisp-unit-linear", "--N", "four"],
        ["solve", "--problem", "crisp-unit-linear", "--tol", "1e-x"],
        ["solve", "--problem", "crisp-unit-linear", "--levels", "1"],
        ["solve", "--problem", "crisp-unit-linear", "--segment-mode", "diagonal"],
        ["solve", "--problem", "crisp-unit-linear", "--format", "xml"],
        ["solve"],
        ["integrate", "--problem", "crisp-unit-linear"],
        [],
        ["converge", "--problem", "crisp-unit-linear", "--orders", "4"],
    ])
    def test_usage_errors(self, argv):
        with pytest.raises(UsageError):
            parse_config(argv)
        assert main(argv) == 2

    def test_dump_rule_needs_no_problem(self):
        assert parse_config(["dump-rule", "--N", "3"]).problem is None

    def test_help_lists_defaults(self, capsys):
        with pytest.raises(SystemExit):
            main(["solve", "--help"])
        out = capsys.readouterr().out
        assert "default 8" in out and "--segment-mode" in out


class TestRun:
    def test_solve_json(self, tmp_path):
        out = tmp_path / "s.json"
        assert main(["solve", "--problem", "crisp-unit-linear", "--N", "4", "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert doc["max_node_error"] <= 1e-10
        assert doc["config"]["N"] == 4
        assert len(doc["solution"]["values"]) == 25
        meta = json.loads((tmp_path / "s.json.meta.json").read_text())
        assert meta["exit_status"] == 0 and "total_runtime_ms" in meta

    def test_solve_csv_round_trip(self, tmp_path):
        out = tmp_path / "s.csv"
        assert main(["solve", "--problem", "fuzzy-unit-linear", "--N", "3", "--format", "csv",
                     "--out", str(out)]) == 0
        rows = list(csv.DictReader(out.open()))
        assert len(rows) == 16 * 11
        assert all(abs(float(r["lo"]) - (1 + float(r["level"]))) < 1e-8 for r in rows)

    def test_converge_csv(self, tmp_path):
        out = tmp_path / "c.csv"
        code = main(["converge", "--problem", "fuzzy-unit-linear", "--orders", "2,3,4,5,6,7,8",
                     "--format", "csv", "--out", str(out), "--threads", "2"])
        assert code == 0
        rows = list(csv.DictReader(out.open()))
        assert list(rows[0]) == ["N", "error", "iterations", "runtime_ms", "status"]
        assert [int(r["N"]) for r in rows] == list(range(2, 9))
        assert nonincreasing([float(r["error"]) for r in rows])
        assert all(r["runtime_ms"] == "" for r in rows)
        meta = json.loads((tmp_path / "c.csv.meta.json").read_text())
        assert set(meta["runtime_ms"]) == {str(n) for n in range(2, 9)}

    def test_converge_smooth_decreasing(self, tmp_path):
        out = tmp_path / "c.json"
        assert main(["converge", "--problem", "crisp-exp-linear", "--orders", "2,4,8",
                     "--out", str(out)]) == 0
        errs = [r["error"] for r in json.loads(out.read_text())["rows"]]
        assert errs[0] > errs[1] > errs[2]

    def test_oracle_negative_kernel(self, capsys):
        code, _, err = run_cli(["oracle", "--problem", "crisp-unit-linear", "--kernel-scale", "-1"],
                               capsys)
        assert code == 4
        assert "PositivityViolationError" in err and "not positive" in err

    def test_oracle_ok(self, tmp_path):
        out = tmp_path / "o.json"
        assert main(["oracle", "--problem", "piecewise-two-segment", "--out", str(out), *FAST]) == 0
        doc = json.loads(out.read_text())
        assert doc["ok"] and doc["agreement"] <= doc["agreement_threshold"]

    def test_verify_bounds(self, tmp_path):
        out = tmp_path / "v.csv"
        assert main(["verify-bounds", "--problem", "crisp-square-nonlinear", "--format", "csv",
                     "--out", str(out), *FAST]) == 0
        rows = list(csv.DictReader(out.open()))
        assert len(rows) == 11
        assert all(float(r["margin"]) >= 0 for r in rows)

    def test_nonconvergence_exit(self, capsys):
        code, _, err = run_cli(["solve", "--problem", "crisp-square-nonlinear", "--kernel-scale",
                                "40", "--N", "6"], capsys)
        assert code == 3 and "NonConvergenceError" in err

    def test_cap_exit(self):
        assert main(["solve", "--problem", "crisp-square-nonlinear", "--max-iters", "2"]) == 3

    def test_unknown_problem(self, capsys):
        code, _, err = run_cli(["solve", "--problem", "unknown-name"], capsys)
        assert code == 2 and "registered" in err

    def test_dump_rule_stdout(self, capsys):
        code, out, _ = run_cli(["dump-rule", "--N", "2", "--format", "csv"], capsys)
        assert code == 0
        rows = list(csv.reader(out.splitlines()))
        assert rows[0] == ["i", "chebyshev_x", "gl_node", "gl_weight"]
        assert float(rows[2][3]) == pytest.approx(8 / 9, abs=1e-16)


COMMANDS = [
    ["solve", "--problem", "fuzzy-unit-linear", "--N", "4"],
    ["solve", "--problem", "crisp-square-nonlinear", "--N", "5", "--format", "csv"],
    ["converge", "--problem", "crisp-exp-linear", "--orders", "2,4,6", "--threads", "3"],
    ["converge", "--problem", "piecewise-two-segment", "--format", "csv"],
    ["oracle", "--problem", "crisp-unit-linear", *FAST],
    ["verify-bounds", "--problem", "piecewise-two-segment", "--format", "csv", *FAST],
    ["dump-rule", "--N", "6"],
]


@pytest.mark.parametrize("argv", COMMANDS, ids=lambda a: "-".join(a[:2]))
def test_deterministic_reports(argv, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main([*argv, "--out", str(a)]) == 0
    assert main([*argv, "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_module_entry_and_log_env(tmp_path):
    env = dict(os.environ, FVIE_LOG="DEBUG")
    proc = subprocess.run([sys.executable, "-m", "fvie", "solve", "--problem",
                           "crisp-square-nonlinear", "--N", "3", "--out", str(tmp_path / "x.json")],
                          capture_output=True, text=True, env=env)
    assert proc.returncode == 0
    assert "sweep 1" in proc.stderr

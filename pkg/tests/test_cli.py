import json
import subprocess
import sys

import numpy as np

from bethezeta.cli import main


def run_cli(args, capsys):
    code = main(args)
    out, err = capsys.readouterr()
    return code, out, err


def write_model(tmp_path, generator, **kwargs):
    from bethezeta.generators import builtin_graphs

    path = tmp_path / f"{generator}.json"
    path.write_text(json.dumps(builtin_graphs(generator, **kwargs)))
    return str(path)


class TestGenerate:
    def test_cycle(self, tmp_path, capsys):
        code, out, _ = run_cli(["generate", "cycle", "--n", "5", "--j", "0.5"], capsys)
        assert code == 0
        obj = json.loads(out)
        assert obj["graph"]["vertices"] == 5
        assert len(obj["graph"]["edges"]) == 5

    def test_example2_sign_pattern(self, capsys):
        code, out, _ = run_cli(["generate", "example2", "--j", "2.0"], capsys)
        assert code == 0
        obj = json.loads(out)
        assert obj["J"]["0-1"] == -2.0
        assert all(v == 2.0 for k, v in obj["J"].items() if k != "0-1")

    def test_theta_multigraph(self, capsys):
        code, out, _ = run_cli(["generate", "theta"], capsys)
        obj = json.loads(out)
        assert obj["graph"]["multigraph"] is True
        assert obj["graph"]["edges"] == [[0, 1]] * 3


class TestLbpCommand:
    def test_tree_run(self, tmp_path, capsys):
        model = write_model(tmp_path, "path", n=5, j=0.4, h=0.2)
        code, out, _ = run_cli(["lbp", model, "--tol", "1e-11"], capsys)
        assert code == 0
        report = json.loads(out)
        assert report["schema_version"] == 1
        assert report["result"]["converged"] is True
        assert len(report["result"]["m"]) == 5
        assert len(report["result"]["spectrum"]) == 8

    def test_report_embeds_config(self, tmp_path, capsys):
        model = write_model(tmp_path, "cycle", n=4, j=0.3)
        code, out, _ = run_cli(["lbp", model, "--damping", "0.25"], capsys)
        report = json.loads(out)
        assert report["config"]["damping"] == 0.25
        assert report["config"]["model"] == model

    def test_deterministic_output(self, tmp_path, capsys):
        model = write_model(tmp_path, "k4", j=0.5, h=0.1)
        _, out1, _ = run_cli(["lbp", model, "--init", "random", "--seed", "3"], capsys)
        _, out2, _ = run_cli(["lbp", model, "--init", "random", "--seed", "3"], capsys)
        assert out1 == out2


class TestBetheCommand:
    def test_eval(self, tmp_path, capsys):
        model = write_model(tmp_path, "cycle", n=4, j=0.3)
        point = tmp_path / "q.json"
        point.write_text(json.dumps({"m": [0.0] * 4, "chi": [0.0] * 4}))
        code, out, _ = run_cli(["bethe", "eval", model, "--point", str(point)], capsys)
        assert code == 0
        report = json.loads(out)
        assert abs(report["result"]["grad_norm"] - 0.3) < 1e-12  # = |J|
        assert all(abs(e - 1.0) < 1e-12 for e in report["result"]["hessian_eigenvalues"])


class TestZetaCommand:
    def test_from_beliefs(self, tmp_path, capsys):
        model = write_model(tmp_path, "cycle", n=4, j=0.3)
        code, out, _ = run_cli(
            ["zeta", model, "--forms", "det,ihara,product", "--max-len", "10"], capsys
        )
        assert code == 0
        result = json.loads(out)["result"]
        assert abs(result["det_form"] - result["ihara_form"]) < 1e-12
        assert abs(result["det_form"] - result["product_form"]) <= result["product_bound"] + 1e-12

    def test_weights_file(self, tmp_path, capsys):
        model = write_model(tmp_path, "theta")
        weights = tmp_path / "u.json"
        weights.write_text(json.dumps({"u": [0.2, 0.2, -0.3, -0.3, 0.1, 0.1]}))
        code, out, _ = run_cli(["zeta", model, "--weights", str(weights)], capsys)
        assert code == 0
        result = json.loads(out)["result"]
        assert abs(result["det_form"] - result["ihara_form"]) < 1e-12


class TestAnalyzeCertify:
    def test_analyze_small_model(self, tmp_path, capsys):
        model = write_model(tmp_path, "cycle", n=3, j=0.4, h=0.1)
        code, out, _ = run_cli(["analyze", model, "--restarts", "30"], capsys)
        assert code == 0
        result = json.loads(out)["result"]
        assert result["index_sum"] == 1
        assert result["count"] == 1
        assert result["certificate"]["kind"] == "tree_or_one_cycle"

    def test_certify_example2(self, tmp_path, capsys):
        model = write_model(tmp_path, "example2", j=3.0, h=0.2)
        code, out, _ = run_cli(["certify", model], capsys)
        assert code == 0
        assert json.loads(out)["result"]["kind"] == "two_cycle_non_attractive"


class TestOracleCommand:
    def test_small_model(self, tmp_path, capsys):
        model = write_model(tmp_path, "cycle", n=4, j=0.5)
        code, out, _ = run_cli(["oracle", model], capsys)
        assert code == 0
        result = json.loads(out)["result"]
        assert np.isfinite(result["log_z"])
        assert result["bethe_gap"] is not None


class TestVerifyCommand:
    def test_main_formula_suite(self, capsys):
        code, out, _ = run_cli(["verify", "--suite", "main-formula", "--trials", "25"], capsys)
        assert code == 0
        result = json.loads(out)["result"]
        assert result["passed"] is True
        assert result["max_log_residual"] <= 1e-8

    def test_ihara_suite(self, capsys):
        code, out, _ = run_cli(["verify", "--suite", "ihara", "--trials", "25"], capsys)
        assert code == 0
        assert json.loads(out)["result"]["passed"] is True

    def test_deterministic(self, capsys):
        _, out1, _ = run_cli(["verify", "--trials", "10", "--seed", "5"], capsys)
        _, out2, _ = run_cli(["verify", "--trials", "10", "--seed", "5"], capsys)
        assert out1 == out2


class TestSweepCommand:
    def test_csv_columns(self, tmp_path, capsys):
        model = write_model(tmp_path, "k4", j=1.0, h=0.0)
        out_path = tmp_path / "sweep.csv"
        code, _, err = run_cli(
            [
                "sweep",
                model,
                "--t-start",
                "2.0",
                "--t-stop",
                "1.5",
                "--steps",
                "6",
                "--output",
                str(out_path),
            ],
            capsys,
        )
        assert code == 0
        lines = out_path.read_text().strip().splitlines()
        assert lines[0].startswith("# schema_version=1 config=")
        assert lines[1] == "t,max_re_lambda,rho,det_sign,log_abs_det,F"
        assert len(lines) == 8


class TestErrorPaths:
    def test_malformed_json_exit_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        code, out, err = run_cli(["lbp", str(bad)], capsys)
        assert code == 2
        assert out == ""

    def test_missing_file_exit_2(self, capsys):
        code, _, err = run_cli(["lbp", "/nonexistent/model.json"], capsys)
        assert code == 2

    def test_schema_violation_exit_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"graph": {"vertices": 2, "edges": [[0, 1]]}, "J": {}, "h": [0, 0]}))
        code, _, err = run_cli(["lbp", str(bad)], capsys)
        assert code == 2


def test_console_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "bethezeta.cli", "generate", "cycle", "--n", "3"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["graph"]["vertices"] == 3

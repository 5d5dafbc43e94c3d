"""
End to end tests of the command line front end
"""
import json
import math
import os

import numpy as np
import pytest

from fracbvp import cli
from fracbvp.fraccalc import GridFunction
from fracbvp.model import ProblemParams, StieltjesFunctional
from fracbvp.reporting import read_solution, write_solution
from fracbvp.solver import linear_constant_oracle

CONSTANT_SOURCE = """
[problem]
preset = example

[f]
builtin = constant
params = kappa=1

[solve]
n_nodes = 257
tol = 1e-10
u0 = constant:0

[verify]
solution = solution.csv
"""

TWO_SOLUTIONS = """
[problem]
preset = example

[f]
builtin = piecewise_linear
params = knots=0:0.1 1:0.1 2:3 16:3

[certify]
rhos = 1:index1, 2:index0, 100:index1

[solve]
n_nodes = 257
"""


def _config(tmp_path, text, name="run.ini"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def _run(capsys, *argv):
    code = cli.main(list(argv) + ["--log-level", "WARNING"])
    return code, capsys.readouterr().out


def test_constants_report(tmp_path, capsys):
    code, out = _run(capsys, "constants", "--config", _config(tmp_path, CONSTANT_SOURCE))
    assert code == cli.EXIT_OK
    report = json.loads(out)
    assert report["command"] == "constants"
    assert report["schema_version"] == 1
    assert report["config"]["problem"]["alpha"] == 1.5
    constants = report["constants"]
    assert constants["c"] == pytest.approx(0.13269, abs=1e-5)
    assert math.floor(constants["c"] * 1000) / 1000 == constants["printed_c"] == 0.132
    assert constants["c_matches_printed"]
    assert constants["inv_M"] == pytest.approx(0.53635, abs=1e-4)
    assert constants["M"] == pytest.approx(constants["printed_inv_M"])
    assert "1/M" in constants["inv_M_note"]
    assert report["regime"]["holds"]
    thresholds = report["thresholds"]
    assert thresholds["matches_unordered"]
    assert not thresholds["assignment_matches"]


def test_constants_output_is_deterministic(tmp_path, capsys):
    path = _config(tmp_path, CONSTANT_SOURCE)
    _, first = _run(capsys, "constants", "--config", path)
    _, second = _run(capsys, "constants", "--config", path)
    assert first == second
    assert first.endswith("\n")


def test_constants_to_out_dir(tmp_path, capsys):
    out_dir = tmp_path / "results"
    code, out = _run(capsys, "constants", "--config", _config(tmp_path, CONSTANT_SOURCE),
                     "--out", str(out_dir))
    assert code == cli.EXIT_OK
    assert out == ""
    with open(out_dir / "constants.json", encoding="utf-8") as report_file:
        assert json.load(report_file)["command"] == "constants"


def test_constants_without_thresholds(tmp_path, capsys):
    text = "[problem]\npreset = example\n\n[functional]\nlambda0 = 0.2\n"
    code, out = _run(capsys, "constants", "--config", _config(tmp_path, text))
    assert code == cli.EXIT_OK
    assert json.loads(out)["thresholds"] is None


def test_certify_two_solutions(tmp_path, capsys):
    code, out = _run(capsys, "certify", "--config", _config(tmp_path, TWO_SOLUTIONS))
    assert code == cli.EXIT_OK
    certificate = json.loads(out)["certificate"]
    assert certificate["satisfied_patterns"] == ["S1", "S2", "S4"]
    assert certificate["guaranteed_solutions"] == 2
    assert certificate["rigorous"]
    assert [check["kind"] for check in certificate["checks"]] == ["index1", "index0", "index1"]
    assert all(audit["holds"] for audit in certificate["gap_constraints"])


def test_certify_scan(tmp_path, capsys):
    text = """
[problem]
preset = example

[f]
expr = 0.1 + 3*u^2/(4 + u^2)

[certify]
scan_min = 0.05
scan_max = 200
scan_n = 6
workers = 2
"""
    code, out = _run(capsys, "certify", "--config", _config(tmp_path, text))
    assert code == cli.EXIT_OK
    certificate = json.loads(out)["certificate"]
    assert len(certificate["checks"]) == 12
    assert not certificate["rigorous"]
    assert "sampled" in certificate["caveat"]


def test_solve_then_verify(tmp_path, capsys):
    path = _config(tmp_path, CONSTANT_SOURCE)
    code, out = _run(capsys, "solve", "--config", path, "--out", str(tmp_path))
    assert code == cli.EXIT_OK
    assert out == ""
    with open(tmp_path / "solve.json", encoding="utf-8") as report_file:
        report = json.load(report_file)
    assert report["solve"]["converged"]
    assert report["solution_file"] == "solution.csv"
    assert report["residuals"]["in_cone"]
    assert report["locations"] is None

    u = read_solution(str(tmp_path / "solution.csv"))
    oracle = linear_constant_oracle(
        ProblemParams(alpha=1.5, beta=0.8, eta=0.75),
        StieltjesFunctional(atoms=[(0.25, 0.5)]), 1.0, u.nodes)
    np.testing.assert_allclose(u.values, oracle.values, rtol=0, atol=1e-8)
    assert u(0.25) == pytest.approx(3.99992, abs=1e-4)

    code, out = _run(capsys, "verify", "--config", path)
    assert code == cli.EXIT_OK
    residuals = json.loads(out)["residuals"]
    assert residuals["bc0_residual"] <= 1e-3
    assert residuals["bc1_residual"] <= 1e-3
    assert residuals["ode_residual"] <= 0.05


def test_solve_writes_to_working_directory(tmp_path, capsys, monkeypatch):
    work = tmp_path / "work"
    work.mkdir()
    monkeypatch.chdir(work)
    code, out = _run(capsys, "solve", "--config", _config(tmp_path, CONSTANT_SOURCE))
    assert code == cli.EXIT_OK
    assert json.loads(out)["command"] == "solve"
    assert os.path.exists(work / "solution.csv")


def test_solve_locates_solution(tmp_path, capsys):
    code, out = _run(capsys, "solve", "--config", _config(tmp_path, TWO_SOLUTIONS),
                     "--out", str(tmp_path))
    assert code == cli.EXIT_OK
    assert out == ""
    with open(tmp_path / "solve.json", encoding="utf-8") as report_file:
        report = json.load(report_file)
    assert report["solve"]["converged"]
    # f = 0.1 while u <= 1: the small solution is one tenth of the f = 1 solution
    assert report["solve"]["sup_norm"] == pytest.approx(0.459395, abs=1e-4)
    residuals = report["residuals"]
    assert residuals["in_cone"] and residuals["nonneg"]
    assert residuals["cone_margin"] > 0
    assert max(residuals["ode_residual"], residuals["bc0_residual"],
               residuals["bc1_residual"]) <= 1e-6
    locations = report["locations"]
    assert [location["pattern"] for location in locations] == ["S1", "S2", "S4"]
    assert locations[-1]["shells"][0]["in_K_rho"]


def test_solve_from_oracle_start(tmp_path, capsys):
    text = CONSTANT_SOURCE.replace("u0 = constant:0", "u0 = oracle:1")
    code, out = _run(capsys, "solve", "--config", _config(tmp_path, text),
                     "--out", str(tmp_path))
    assert code == cli.EXIT_OK
    with open(tmp_path / "solve.json", encoding="utf-8") as report_file:
        assert json.load(report_file)["solve"]["iterations"] == 0


def test_diverging_solve_is_not_an_error(tmp_path, capsys):
    text = """
[problem]
preset = example

[f]
expr = 100*u

[solve]
n_nodes = 129
u0 = constant:1
"""
    code, out = _run(capsys, "solve", "--config", _config(tmp_path, text),
                     "--out", str(tmp_path))
    assert code == cli.EXIT_OK
    with open(tmp_path / "solve.json", encoding="utf-8") as report_file:
        solve = json.load(report_file)["solve"]
    assert not solve["converged"]
    assert solve["diverged"]


@pytest.mark.parametrize("text, command, expected", [
    ("[problem]\nalpha = 2.5\nbeta = 1\neta = 0.5\n", "constants", cli.EXIT_CONFIG),
    ("[problem]\nalpha = 1.5\nbeta = 0.3\neta = 0.5\n", "constants", cli.EXIT_REGIME),
    ("[problem]\npreset = nowhere\n", "constants", cli.EXIT_CONFIG),
    ("[problem]\npreset = example\n[extra]\nkey = 1\n", "constants", cli.EXIT_CONFIG),
    ("[problem]\npreset = example\n[f]\nexpr = 1 +\n[certify]\nrhos = 1\n",
     "certify", cli.EXIT_CONFIG),
    ("[problem]\npreset = example\n[f]\nexpr = 1\n[certify]\nrhos =\n",
     "certify", cli.EXIT_CONFIG),
    ("[problem]\npreset = example\n[f]\nexpr = 1\n", "certify", cli.EXIT_CONFIG),
    ("[problem]\npreset = thermostat\n[f]\nexpr = 1\n[solve]\nu0 = oracle:1\n",
     "solve", cli.EXIT_CONFIG),
    ("[problem]\npreset = example\n[f]\nexpr = u - 1\n[certify]\nrhos = 0.5:index1\n",
     "certify", cli.EXIT_NUMERIC),
])
def test_exit_codes(tmp_path, capsys, text, command, expected):
    code, out = _run(capsys, command, "--config", _config(tmp_path, text))
    assert code == expected
    assert out == ""


@pytest.mark.parametrize("nodes", [
    np.linspace(0.0, 1.0, 33),
    np.linspace(0.0, 1.0, 129) ** 2,
])
def test_verify_rejects_unusable_solution_mesh(tmp_path, capsys, nodes):
    write_solution(GridFunction(nodes=nodes, values=np.ones_like(nodes)),
                   str(tmp_path / "solution.csv"))
    text = "[problem]\npreset = example\n[f]\nexpr = 1\n[verify]\nsolution = solution.csv\n"
    code, out = _run(capsys, "verify", "--config", _config(tmp_path, text))
    assert code == cli.EXIT_CONFIG
    assert out == ""


def test_missing_config_file(tmp_path, capsys):
    code, _ = _run(capsys, "constants", "--config", str(tmp_path / "absent.ini"))
    assert code == cli.EXIT_CONFIG


def test_version(capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(["--version"])
    assert info.value.code == 0
    assert capsys.readouterr().out.strip() == cli.VERSION


def test_thermostat_constants(tmp_path, capsys):
    code, out = _run(capsys, "constants", "--config",
                     _config(tmp_path, "[problem]\npreset = thermostat\n"))
    assert code == cli.EXIT_OK
    constants = json.loads(out)["constants"]
    assert constants["c"] == pytest.approx(1.0 / 3.0)
    assert constants["norm_gamma"] == pytest.approx(1.5)


def test_zero_source_writes_zero_solution(tmp_path, capsys):
    text = "[problem]\npreset = example\n[f]\nexpr = 0\n[solve]\nn_nodes = 65\n"
    code, _ = _run(capsys, "solve", "--config", _config(tmp_path, text), "--out", str(tmp_path))
    assert code == cli.EXIT_OK
    u = read_solution(str(tmp_path / "solution.csv"))
    assert u.size == 65
    assert np.all(u.values == 0.0)

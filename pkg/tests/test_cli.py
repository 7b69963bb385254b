"""Config parsing, subcommands, artifacts, and exit codes."""

import os

import numpy as np
import pytest

from pathlift import cli
from pathlift.errors import ConfigurationError

SPHERE_LIFT = """
[problem]
kind = builtin-map
map = sphere
dim = 2
u0 = 1, 0

[path]
target = 0
"""

FOLD_LIFT = """
[problem]
kind = builtin-map
map = fold
u0 = 0.1, 0

[path]
target = 0.16, 0.5
"""

SPHERE_CHECK = """
[problem]
kind = builtin-map
map = sphere
dim = 3

[check]
radii = 1, 2, 4
xi_c = 1.0
xi_p = 1.0
"""

LINEAR_CHECK = """
[problem]
kind = linear
matrix = 1 0 0 0; 0 1 0 0; 0 0 1 0
"""


def _cfg(tmp_path, text, name="run.ini"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


# -- parsing ---------------------------------------------------------------


def test_parse_config_defaults():
    cfg = cli.parse_config(SPHERE_LIFT)
    assert cfg["problem"]["kind"] == "builtin-map"
    assert cfg["solver"]["tol_ode"] == 1e-8
    assert cfg["path"]["kind"] == "line"
    np.testing.assert_allclose(cfg["problem"]["u0"], [1.0, 0.0])


def test_parse_config_rejects_unknown_key():
    with pytest.raises(ConfigurationError, match="solver.bogus"):
        cli.parse_config(SPHERE_LIFT + "\n[solver]\nbogus = 1\n")


def test_parse_config_rejects_unknown_section():
    with pytest.raises(ConfigurationError, match="mystery"):
        cli.parse_config(SPHERE_LIFT + "\n[mystery]\nx = 1\n")


def test_parse_config_requires_problem_kind():
    with pytest.raises(ConfigurationError, match="problem.kind"):
        cli.parse_config("[path]\ntarget = 0\n")


def test_parse_config_rejects_negative_tolerance():
    with pytest.raises(ConfigurationError, match="solver.tol_ode"):
        cli.parse_config(SPHERE_LIFT + "\n[solver]\ntol_ode = -1\n")


def test_parse_config_rejects_diverging_xi_violation():
    with pytest.raises(ConfigurationError, match="p <= 1"):
        cli.parse_config(SPHERE_CHECK.replace("xi_p = 1.0", "xi_p = 1.5"))


def test_parse_config_rejects_bad_numbers():
    with pytest.raises(ConfigurationError, match="numbers"):
        cli.parse_config(SPHERE_LIFT.replace("u0 = 1, 0", "u0 = one, 0"))


# -- subcommands -----------------------------------------------------------


def test_lift_singular_terminal_exit_2(tmp_path):
    out = tmp_path / "out"
    code = cli.main(["lift", "--config", _cfg(tmp_path, SPHERE_LIFT),
                     "--out-dir", str(out)])
    assert code == 2
    csv = (out / "trace.csv").read_text().splitlines()
    assert csv[0] == ("s,lambda_1,a_1,h,f,g,norm_u,norm_dudS,"
                      "residual,step_size,flags")
    # final row is the singular state: g is empty, flag says singular
    last = csv[-1].split(",")
    assert last[5] == ""
    assert last[-1] == "singular"
    report = (out / "report.txt").read_text()
    assert "SingularTerminal" in report


def test_lift_reached_exit_0(tmp_path):
    out = tmp_path / "out"
    code = cli.main(["lift", "--config", _cfg(tmp_path, FOLD_LIFT),
                     "--out-dir", str(out)])
    assert code == 0
    rows = (out / "trace.csv").read_text().splitlines()
    assert len(rows) >= 3
    # floats are emitted at 17 significant digits and round-trip
    s_vals = [float(r.split(",")[0]) for r in rows[1:]]
    assert s_vals[0] == 0.0 and s_vals[-1] == 1.0


def test_lift_bad_anchor_exit_1_writes_nothing(tmp_path):
    bad = """
[problem]
kind = builtin-map
map = fold
u0 = 0.1, 0

[path]
kind = polyline
waypoints = 5 5; 0.16 0.5
"""
    out = tmp_path / "out"
    code = cli.main(["lift", "--config", _cfg(tmp_path, bad),
                     "--out-dir", str(out)])
    assert code == 1
    assert not out.exists()


def test_lift_config_error_exit_1(tmp_path):
    code = cli.main(["lift", "--config",
                     _cfg(tmp_path, SPHERE_LIFT + "\n[solver]\nds_min = 0\n"),
                     "--out-dir", str(tmp_path / "o")])
    assert code == 1
    code = cli.main(["lift", "--config", str(tmp_path / "missing.ini")])
    assert code == 1


def test_check_pass_exit_0(tmp_path):
    out = tmp_path / "out"
    code = cli.main(["check", "--config", _cfg(tmp_path, SPHERE_CHECK),
                     "--out-dir", str(out)])
    assert code == 0
    text = (out / "report.txt").read_text()
    assert "C_est" in text
    shells = (out / "shells.csv").read_text().splitlines()
    assert shells[0].startswith("radius,")
    assert len(shells) == 4  # header + three radii


def test_check_falsified_exit_4(tmp_path):
    out = tmp_path / "out"
    code = cli.main(["check", "--config", _cfg(tmp_path, LINEAR_CHECK),
                     "--out-dir", str(out)])
    assert code == 4
    assert "K_est = 0" in (out / "report.txt").read_text()


def test_check_seed_override_changes_report(tmp_path):
    cfg = _cfg(tmp_path, SPHERE_CHECK)
    a, b = tmp_path / "a", tmp_path / "b"
    cli.main(["check", "--config", cfg, "--out-dir", str(a)])
    cli.main(["check", "--config", cfg, "--out-dir", str(b), "--seed", "7"])
    ra = (a / "report.txt").read_text()
    rb = (b / "report.txt").read_text()
    assert "seed = 0" in ra and "seed = 7" in rb


def test_validate_exit_0(tmp_path, capsys):
    code = cli.main(["validate", "--config", _cfg(tmp_path, SPHERE_LIFT)])
    assert code == 0
    out = capsys.readouterr().out
    assert out.count("pass") == 4


def test_list_problems(capsys):
    assert cli.main(["list-problems"]) == 0
    out = capsys.readouterr().out
    for name in ("sphere", "fold", "linear", "brockett", "unicycle",
                 "lti", "single-integrator"):
        assert name in out


def test_endpoint_problem_from_config(tmp_path):
    text = """
[problem]
kind = endpoint
system = brockett
x0 = 0, 0, 0
horizon = 1.0
segments = 6
u0_constant = 1, 1

[path]
target = 0.8, 0.9, 0.4
"""
    out = tmp_path / "out"
    code = cli.main(["lift", "--config", _cfg(tmp_path, text),
                     "--out-dir", str(out)])
    assert code == 0
    rows = (out / "trace.csv").read_text().splitlines()
    # brockett has a three-dimensional state, hence three eigenvalue columns
    assert rows[0].split(",")[1:4] == ["lambda_1", "lambda_2", "lambda_3"]


def test_atomic_write_leaves_no_temp_files(tmp_path):
    out = tmp_path / "out"
    cli.main(["lift", "--config", _cfg(tmp_path, FOLD_LIFT),
              "--out-dir", str(out)])
    assert not [f for f in os.listdir(out) if f.endswith(".tmp")]


def test_trace_floats_have_17_significant_digits():
    assert cli._fmt(1.0 / 3.0) == "0.33333333333333331"
    assert cli._fmt(1.0) == "1"

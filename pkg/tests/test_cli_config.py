import json

import numpy as np
import pytest

from splashguard import config
from splashguard.cli import EXIT_CHECK_FAILED, EXIT_ERROR, EXIT_OK, main, parse_args, selftest_checks
from splashguard.errors import ConfigError, UsageError


# configuration -------------------------------------------------------------------------------
def test_defaults_cover_every_key():
    cfg = config.load()
    assert set(cfg.values) == set(config.KEYS)
    assert cfg.where("grid.n") == "default"


def test_file_values_and_overrides(tmp_path):
    p = tmp_path / "c.cfg"
    p.write_text("# comment\ngrid.n = 128\nrun.dt = 5e-3  # trailing\nrun.refined = yes\n")
    cfg = config.load(p, ["grid.n=32"])
    assert cfg["grid.n"] == 32 and cfg["run.dt"] == 5e-3 and cfg["run.refined"] is True
    assert cfg.where("run.dt") == f"{p}:3"
    assert cfg.where("grid.n") == "--set"


@pytest.mark.parametrize("text,line", [("grid.n = 64\nbogus.key = 1\n", 2),
                                       ("\n\ngrid.n = sixty\n", 3),
                                       ("grid.n 64\n", 1),
                                       ("run.refined = maybe\n", 1)])
def test_config_errors_carry_path_and_line(tmp_path, text, line):
    p = tmp_path / "c.cfg"
    p.write_text(text)
    with pytest.raises(ConfigError) as info:
        config.load(p)
    assert info.value.line == line
    assert str(info.value).startswith(f"{p}:{line}: ")


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        config.load(tmp_path / "absent.cfg")


def test_bad_override():
    with pytest.raises(ConfigError):
        config.load(None, ["grid.n"])


# argument parsing ------------------------------------------------------------------------------
def test_parse_args():
    cmd = parse_args(["simulate", "--out", "o", "--set", "grid.n=32", "--set", "run.steps=2"])
    assert cmd.subcommand == "simulate" and cmd.overrides == ("grid.n=32", "run.steps=2")
    with pytest.raises(UsageError):
        parse_args(["fly"])
    with pytest.raises(UsageError):
        parse_args(["simulate", "--set", "noequals"])


def test_usage_error_exit_code(capsys):
    assert main(["fly"]) == EXIT_ERROR
    assert "usage error" in capsys.readouterr().err


# subcommands -------------------------------------------------------------------------------------
def run_cli(tmp_path, *args):
    return main([*args, "--out", str(tmp_path)])


def test_simulate_rest(tmp_path):
    assert run_cli(tmp_path, "simulate", "--set", "grid.n=32", "--set", "run.steps=3") == EXIT_OK
    data = json.loads((tmp_path / "trace.json").read_text())
    assert data["steps"] == 4 and all(data["admissibility"].values())
    assert data["certificate"]["violations"] == []
    assert (tmp_path / "trace.csv").read_text().startswith("t,CA,")


def test_simulate_inadmissible_start(tmp_path):
    code = run_cli(tmp_path, "simulate", "--set", "grid.n=32", "--set", "run.steps=1", "--set", "bulk.c2=100")
    assert code == EXIT_CHECK_FAILED


def test_simulate_with_noise_and_disc(tmp_path):
    code = run_cli(tmp_path, "simulate", "--set", "scenario.name=wavy_sheet", "--set", "grid.n=32",
                   "--set", "run.steps=2", "--set", "scenario.noise=0.01", "--set", "bulk.kind=disc")
    assert code == EXIT_OK


def test_detect_keyhole(tmp_path):
    assert run_cli(tmp_path, "detect-splash", "--set", "grid.n=256") == EXIT_OK
    rep = json.loads((tmp_path / "detect.json").read_text())
    assert rep["candidate"]["d"] == pytest.approx(1e-3, rel=1e-2) and rep["invariants_ok"]
    assert (tmp_path / "frame.json").exists()


def test_detect_flat_has_no_candidate(tmp_path):
    assert run_cli(tmp_path, "detect-splash", "--set", "curve.family=flat") == EXIT_CHECK_FAILED
    assert json.loads((tmp_path / "detect.json").read_text())["candidate"] is None


def test_unknown_family_is_a_config_error(tmp_path, capsys):
    assert run_cli(tmp_path, "detect-splash", "--set", "curve.family=spiral") == EXIT_ERROR
    assert "spiral" in capsys.readouterr().err


def test_config_error_reports_location(tmp_path, capsys):
    p = tmp_path / "c.cfg"
    p.write_text("grid.n = 64\nrun.dt = fast\n")
    assert main(["simulate", "--config", str(p), "--out", str(tmp_path)]) == EXIT_ERROR
    assert f"{p}:2:" in capsys.readouterr().err


def test_verify_bound_short_sweep(tmp_path):
    code = run_cli(tmp_path, "verify-bound", "--set", "sweep.d_min_exp=-3", "--set", "sweep.n=128",
                   "--set", "operators.n=128")
    rep = json.loads((tmp_path / "bound_report.json").read_text())
    assert rep["operators_ok"]
    assert code == (EXIT_OK if rep["envelope_ok"] else EXIT_CHECK_FAILED)
    assert len((tmp_path / "bound_report.csv").read_text().splitlines()) == 6


@pytest.mark.parametrize("fieldname", ["shear", "quadratic"])
def test_recover_gradient(tmp_path, fieldname):
    code = run_cli(tmp_path, "recover-gradient", "--set", f"recover.field={fieldname}", "--set", "grid.n=64",
                   "--set", "curve.family=sinusoid")
    assert code == EXIT_OK
    assert json.loads((tmp_path / "recovery.json").read_text())["ok"]


def test_recover_unknown_field(tmp_path):
    assert run_cli(tmp_path, "recover-gradient", "--set", "recover.field=swirl") == EXIT_ERROR


def write_trace(path, D):
    t = np.linspace(0, 1, len(D))
    lines = ["t,D,Dtilde"] + [f"{float(a)!r},{float(b)!r},{float(b)!r}" for a, b in zip(t, D)]
    path.write_text("\n".join(lines) + "\n")


def test_certify_exact_and_broken_traces(tmp_path):
    t = np.linspace(0, 1, 101)
    D = np.exp(np.log(10.0) * np.exp(0.8 * t))
    write_trace(tmp_path / "good.csv", D)
    assert run_cli(tmp_path, "certify", "--set", f"certify.trace={tmp_path / 'good.csv'}",
                   "--set", "certify.C=0.8") == EXIT_OK
    assert json.loads((tmp_path / "certificate.json").read_text())["passed"]
    D[60:] *= 5
    write_trace(tmp_path / "bad.csv", D)
    assert run_cli(tmp_path, "certify", "--set", f"certify.trace={tmp_path / 'bad.csv'}",
                   "--set", "certify.C=0.8") == EXIT_CHECK_FAILED


def test_certify_needs_a_trace(tmp_path):
    assert run_cli(tmp_path, "certify") == EXIT_ERROR
    (tmp_path / "x.csv").write_text("a,b\n1,2\n")
    assert run_cli(tmp_path, "certify", "--set", f"certify.trace={tmp_path / 'x.csv'}") == EXIT_ERROR


def test_certify_reads_simulate_output(tmp_path):
    assert run_cli(tmp_path, "simulate", "--set", "scenario.name=wavy_sheet", "--set", "grid.n=32",
                   "--set", "run.steps=3") == EXIT_OK
    assert run_cli(tmp_path, "certify", "--set", f"certify.trace={tmp_path / 'trace.csv'}") == EXIT_OK


def test_selftest(tmp_path, capsys):
    checks = selftest_checks()
    assert checks and all(ok for _, ok in checks)
    assert run_cli(tmp_path, "selftest") == EXIT_OK
    out = capsys.readouterr().out.splitlines()
    assert len(out) == len(checks) and all(line.startswith("PASS ") for line in out)

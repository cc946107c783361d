"""Tests for the rhls command line."""

import json
import logging
import math
from unittest.mock import patch

import numpy as np
import pytest
from pydantic import ValidationError

from rhls.cli import EXIT_FAILED, EXIT_OK, EXIT_USAGE, RunConfig, main, parse_config
from rhls.core import RadialFn, SampledFn1D, ZonalFn, read_csv, write_csv
from rhls.quadrature import log_grid
from rhls.reports import compare


def _run(capsys, *argv):
    status = main(list(argv))
    out, err = capsys.readouterr()
    return status, out, err


@pytest.fixture
def radial_csv(tmp_path):
    f = RadialFn.from_function(log_grid(1, half_width=16.0, step=0.1), lambda r: (1.0 + r * r) ** -1.5)
    path = tmp_path / "f.csv"
    write_csv(f, path)
    return path


@pytest.fixture
def step_csv(tmp_path):
    g = SampledFn1D.uniform([0.5, 1.0, 2.0, 4.0], 0.0, 1.0)
    path = tmp_path / "g.csv"
    write_csv(g, path)
    return path


def test_constant_json(capsys):
    status, out, _ = _run(capsys, "constant", "--n", "1", "--alpha", "2", "--json")
    assert status == EXIT_OK
    doc = json.loads(out)
    assert doc["command"] == "constant"
    assert doc["passed"] is True
    assert doc["n_star"] == pytest.approx(2.0 / math.pi ** 2, rel=1e-12)
    assert doc["kernel_integral"] == pytest.approx(8.0)
    assert doc["reports"][0]["name"] == "sharp_constant_cross_check"


def test_constant_text(capsys):
    status, out, _ = _run(capsys, "constant", "--n", "3", "--alpha", "4.5")
    assert status == EXIT_OK
    assert out.startswith("constant\n  n_star: ")
    assert "[PASS] sharp_constant_cross_check" in out
    assert out.rstrip().endswith("1/1 checks passed")


def test_alpha_must_exceed_n(capsys):
    status, _, err = _run(capsys, "constant", "--n", "2", "--alpha", "2")
    assert status == EXIT_USAGE
    assert "alpha must exceed" in err


def test_bad_syntax_exits_with_usage(capsys):
    assert main(["nope"]) == EXIT_USAGE
    assert main(["constant", "--n", "1"]) == EXIT_USAGE


def test_p_outside_range(capsys):
    with pytest.raises(ValidationError):
        RunConfig(command="apply", n=1, alpha=2.0, p=0.4)
    status, _, err = _run(capsys, "apply", "--n", "1", "--alpha", "2", "--p", "0.4", "--input", "x.csv")
    assert status == EXIT_USAGE
    assert "--p must lie" in err


def test_sweep_csv(capsys):
    status, out, _ = _run(
        capsys, "sweep", "--n", "1", "--alpha-min", "1.5", "--alpha-max", "3", "--count", "4", "--format", "csv"
    )
    assert status == EXIT_OK
    lines = out.splitlines()
    assert lines[0] == "alpha,n_star"
    assert len(lines) == 5
    alpha, n_star = (float(x) for x in lines[2].split(","))
    assert alpha == pytest.approx(2.0)
    assert n_star == pytest.approx(2.0 / math.pi ** 2)


def test_sweep_rejects_bad_range(capsys):
    status, _, err = _run(capsys, "sweep", "--n", "2", "--alpha-min", "1.5", "--alpha-max", "3")
    assert status == EXIT_USAGE
    assert "n < min < max" in err


def test_kelvin_text(capsys):
    status, out, _ = _run(
        capsys, "kelvin", "--n", "1", "--alpha", "2", "--lambda", "2", "--half-width", "6", "--step", "0.1"
    )
    assert status == EXIT_OK
    assert "[PASS] kelvin_self_inversion" in out
    assert "[PASS] kelvin_involution" in out


def test_kelvin_rejects_nonpositive_radius(capsys):
    status, _, err = _run(capsys, "kelvin", "--n", "1", "--alpha", "2", "--lambda", "-1")
    assert status == EXIT_USAGE
    assert "--lambda must be positive" in err


def test_lift_writes_zonal_csv(capsys, radial_csv, tmp_path):
    out_path = tmp_path / "F.csv"
    status, out, _ = _run(
        capsys, "lift", "--n", "1", "--alpha", "2", "--input", str(radial_csv), "--output", str(out_path)
    )
    assert status == EXIT_OK
    assert out == ""
    F = read_csv(out_path)
    assert isinstance(F, ZonalFn)
    np.testing.assert_allclose(F.values, 2.0 ** -1.5, rtol=1e-12)


def test_lift_rejects_step_input(capsys, step_csv):
    status, _, err = _run(capsys, "lift", "--n", "1", "--alpha", "2", "--input", str(step_csv))
    assert status == EXIT_USAGE
    assert "radial CSV" in err


def test_norm(capsys, step_csv):
    status, out, _ = _run(capsys, "norm", "--p", "-1", "--input", str(step_csv), "--json")
    assert status == EXIT_OK
    doc = json.loads(out)
    # harmonic mean of 0.5, 1, 2, 4
    assert doc["norm"] == pytest.approx(1.0 / (0.25 * (2.0 + 1.0 + 0.5 + 0.25)))
    assert doc["reports"] == []


def test_layercake(capsys, step_csv):
    status, out, _ = _run(capsys, "layercake", "--r", "-0.5", "--input", str(step_csv), "--json")
    assert status == EXIT_OK
    doc = json.loads(out)
    assert doc["layer_cake"] == pytest.approx(doc["direct"], rel=1e-6)


def test_layercake_needs_negative_exponent(capsys, step_csv):
    status, _, err = _run(capsys, "layercake", "--r", "0.5", "--input", str(step_csv))
    assert status == EXIT_USAGE
    assert "must be negative" in err


def test_apply_radial(capsys, tmp_path):
    f = RadialFn.from_function(log_grid(1, half_width=8.0, step=0.1), lambda r: (1.0 + r * r) ** -1.5)
    src = tmp_path / "f.csv"
    write_csv(f, src)
    status, out, _ = _run(capsys, "apply", "--n", "1", "--alpha", "2", "--input", str(src))
    assert status == EXIT_OK
    assert out.startswith("# rhls radial n=1")


def test_apply_split_needs_radial_input(capsys, tmp_path, radial_csv):
    zonal = tmp_path / "F.csv"
    assert main(["lift", "--n", "1", "--alpha", "2", "--input", str(radial_csv), "--output", str(zonal)]) == EXIT_OK
    status, _, err = _run(capsys, "apply", "--n", "1", "--alpha", "2", "--input", str(zonal), "--split", "1")
    assert status == EXIT_USAGE
    assert "radial input only" in err


def test_verify_json(capsys):
    status, out, _ = _run(
        capsys, "verify", "--n", "1", "--alpha", "2", "--which", "holder", "layercake", "--seeds", "2", "--json"
    )
    assert status == EXIT_OK
    doc = json.loads(out)
    assert doc["checks"] == "holder,layercake"
    assert len(doc["reports"]) == 2 + 2 * 4
    assert {r["inputs"]["check"] for r in doc["reports"]} == {"holder", "layercake"}


def test_verify_rejects_unknown_check(capsys):
    assert main(["verify", "--n", "1", "--alpha", "2", "--which", "nope"]) == EXIT_USAGE


def test_verify_failure_sets_exit_code(capsys):
    def run(names, n, alpha, seeds, threads=None):
        return [compare("broken", 2.0, 1.0, 1e-6)]

    with patch("rhls.cli.REGISTRY.run", side_effect=run):
        status, out, _ = _run(capsys, "verify", "--n", "1", "--alpha", "2", "--which", "holder")
    assert status == EXIT_FAILED
    assert "[FAIL] broken" in out


def test_minimize_writes_trace(capsys, tmp_path):
    trace = tmp_path / "trace.csv"
    _run(
        capsys, "minimize", "--n", "1", "--alpha", "2", "--nodes", "32", "--maxit", "3", "--tol", "0",
        "--trace", str(trace),
    )
    lines = trace.read_text().splitlines()
    assert lines[0] == "iteration,quotient"
    assert len(lines) == 5


def test_el_rejects_nonpositive_d(capsys):
    status, _, err = _run(capsys, "el", "--n", "1", "--alpha", "2", "--d", "0")
    assert status == EXIT_USAGE
    assert "--d must be positive" in err


def test_demo_concentration_csv(capsys):
    status, out, _ = _run(
        capsys, "demo-concentration", "--n", "1", "--alpha", "2", "--eps", "1", "0.5", "--format", "csv"
    )
    lines = out.splitlines()
    assert lines[0] == "eps,f_eps_e1,potential_e1,norm_p,quotient"
    assert len(lines) == 3
    assert float(lines[1].split(",")[0]) == 1.0


def test_el_json(capsys):
    status, out, _ = _run(capsys, "el", "--n", "1", "--alpha", "2", "--json")
    assert status == EXIT_OK
    doc = json.loads(out)
    assert doc["c1"] == pytest.approx(2.0 ** 0.25, rel=1e-9)
    assert doc["bounds_constant"] == pytest.approx(2.0 ** 0.25, rel=1e-9)


def test_output_file(capsys, tmp_path):
    target = tmp_path / "out.json"
    status, out, _ = _run(capsys, "constant", "--n", "1", "--alpha", "2", "--json", "--output", str(target))
    assert status == EXIT_OK
    assert out == ""
    assert json.loads(target.read_text())["passed"] is True


def test_verbosity_sets_log_level():
    with patch("rhls.cli.logging.basicConfig") as basic:
        parse_config(["constant", "--n", "1", "--alpha", "2", "-vv"])
    assert basic.call_args.kwargs["level"] == logging.DEBUG

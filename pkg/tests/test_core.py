"""Tests for the exponent algebra and the sampled-function containers."""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from rhls.core import (
    ExponentSet,
    RadialFn,
    SampledFn1D,
    ZonalFn,
    make_critical_exponents,
    make_general_exponents,
    read_csv,
    write_csv,
)
from rhls.quadrature import log_grid, zonal_grid


def test_critical_exponents_one_two():
    exps = make_critical_exponents(1, 2)
    assert exps.p == pytest.approx(2.0 / 3.0)
    assert exps.t == pytest.approx(2.0 / 3.0)
    assert exps.q == pytest.approx(-2.0)
    assert exps.lambda_ == pytest.approx(-1.0)
    assert exps.theta == pytest.approx(-3.0)
    assert exps.kappa == pytest.approx(-3.0)
    assert exps.is_critical
    assert exps.p_conjugate == pytest.approx(exps.q)


def test_general_exponents():
    exps = make_general_exponents(1, 2, 0.6)
    assert exps.q == pytest.approx(-3.0)
    assert exps.t == pytest.approx(0.75)
    assert exps.theta == pytest.approx(-2.5)
    assert exps.kappa == pytest.approx(-4.0)
    assert not exps.is_critical
    # q and t are Hoelder conjugate
    assert 1.0 / exps.q + 1.0 / exps.t == pytest.approx(1.0)


def test_exponents_reject_bad_inputs():
    with pytest.raises(ValueError, match="alpha must exceed n"):
        make_critical_exponents(2, 2)
    with pytest.raises(ValueError, match="p must lie"):
        make_general_exponents(1, 2, 0.4)
    with pytest.raises(ValueError, match="integer"):
        make_critical_exponents(1.5, 3)


def test_exponent_set_validator_checks_relations():
    good = make_critical_exponents(1, 2).model_dump()
    good["q"] = -3.0
    with pytest.raises(ValidationError):
        ExponentSet(**good)


def test_exponent_set_serializes_lambda_alias():
    data = make_critical_exponents(2, 4).model_dump(by_alias=True)
    assert data["lambda"] == pytest.approx(-2.0)
    assert ExponentSet.model_validate(data) == make_critical_exponents(2, 4)


def test_require():
    exps = make_critical_exponents(1, 2)
    exps.require(1, 2.0)
    with pytest.raises(ValueError):
        exps.require(2, 3.0)


def test_zonal_fn_validation():
    grid = zonal_grid(2, 8)
    F = ZonalFn.on_grid(grid, np.ones(8))
    assert F.integral() == pytest.approx(4.0 * math.pi)
    with pytest.raises(ValueError, match="nonnegative"):
        ZonalFn.on_grid(grid, -np.ones(8))
    with pytest.raises(ValueError, match="weights sum"):
        ZonalFn(angles=grid.angles, weights=0.5 * grid.weights, values=np.ones(8), n=2)
    with pytest.raises(ValueError, match="one length"):
        ZonalFn.on_grid(grid, np.ones(7))


def test_zonal_fn_accepts_truncated_caps():
    grid = zonal_grid(1, 16)
    area = 2.0 * math.pi
    F = ZonalFn(angles=grid.angles, weights=(1.0 - 1e-4) * grid.weights, values=np.ones(16), n=1)
    assert F.missing_area == pytest.approx(1e-4 * area, rel=1e-6)
    with pytest.raises(ValueError, match="weights sum"):
        ZonalFn(angles=grid.angles, weights=(1.0 + 1e-5) * grid.weights, values=np.ones(16), n=1)


def test_zonal_fn_values_read_only():
    F = ZonalFn.from_function(zonal_grid(1, 8), lambda t: 1.0 + t * t)
    with pytest.raises(ValueError):
        F.values[0] = 3.0


def test_radial_fn_grid_round_trip():
    grid = log_grid(2, half_width=3.0, step=0.25)
    f = RadialFn.from_function(grid, lambda r: np.exp(-r))
    assert f.grid == grid
    assert f.step == pytest.approx(0.25)
    np.testing.assert_allclose(f.radii, grid.radii)


def test_radial_fn_rejects_nonuniform_grid():
    with pytest.raises(ValueError, match="uniformly spaced"):
        RadialFn(log_radii=[0.0, 0.1, 0.3], values=[1.0, 1.0, 1.0], n=1)
    with pytest.raises(ValueError, match="increasing"):
        RadialFn(log_radii=[0.0, -0.1, -0.2], values=[1.0, 1.0, 1.0], n=1)


def test_radial_evaluate_interpolates():
    f = RadialFn.on_log_grid(1, lambda r: 1.0 / (1.0 + r * r), half_width=6.0, step=0.05)
    np.testing.assert_allclose(f.evaluate(f.radii), f.values, rtol=1e-12)
    assert f.evaluate(1.2345) == pytest.approx(1.0 / (1.0 + 1.2345 ** 2), rel=1e-6)
    # below the grid: innermost value
    assert f.evaluate(1e-9) == pytest.approx(f.values[0])
    with pytest.raises(ValueError, match="beyond the grid edge"):
        f.evaluate(1e4)


def test_step_function_geometry():
    g = SampledFn1D.uniform([1.0, 2.0, 3.0, 4.0], 0.0, 2.0)
    np.testing.assert_allclose(g.widths, 0.5)
    np.testing.assert_allclose(g.midpoints, [0.25, 0.75, 1.25, 1.75])
    assert g.measure == pytest.approx(2.0)
    assert g.period == pytest.approx(2.0)
    assert g.is_uniform
    assert not SampledFn1D(breakpoints=[0.0, 1.0, 3.0], values=[1.0, 1.0]).is_uniform


def test_step_function_validation():
    with pytest.raises(ValueError, match="one value per cell"):
        SampledFn1D(breakpoints=[0.0, 1.0], values=[1.0, 2.0])
    with pytest.raises(ValueError, match="increasing"):
        SampledFn1D(breakpoints=[0.0, 1.0, 1.0], values=[1.0, 2.0])


def test_csv_round_trip_radial(tmp_path):
    f = RadialFn.on_log_grid(3, lambda r: (1.0 + r * r) ** -2, half_width=4.0, step=0.5)
    path = tmp_path / "f.csv"
    write_csv(f, path)
    assert path.read_text().startswith("# rhls radial n=3")
    back = read_csv(path)
    assert isinstance(back, RadialFn)
    assert back.n == 3
    np.testing.assert_array_equal(back.values, f.values)


def test_csv_step_function(tmp_path):
    g = SampledFn1D.uniform([0.5, 1.5, 2.5], 0.0, 3.0)
    path = tmp_path / "g.csv"
    write_csv(g, path)
    back = read_csv(path)
    np.testing.assert_allclose(back.breakpoints, g.breakpoints)
    np.testing.assert_array_equal(back.values, g.values)


def test_read_csv_rejects_foreign_file(tmp_path):
    path = tmp_path / "x.csv"
    path.write_text("a,b,c\n1,2,3\n")
    with pytest.raises(ValueError, match="not an rhls CSV"):
        read_csv(path)

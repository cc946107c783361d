"""Tests for stereographic projection, lifts, dilations and Kelvin inversions."""

import logging
import math

import numpy as np
import pytest

from rhls.core import RadialFn, ZonalFn, make_critical_exponents
from rhls.geometry import (
    KelvinParams,
    chordal,
    dilate,
    dilation_loss,
    drop_function,
    half_conformal_log,
    kelvin_kernel,
    kelvin_point,
    kelvin_transform,
    lift_function,
    stereo_drop,
    stereo_lift,
)
from rhls.norms import quasi_norm
from rhls.quadrature import log_grid
from rhls.special import sphere_area

EXPS = make_critical_exponents(1, 2)


def _extremal(grid, exps=EXPS):
    e = 0.5 * (exps.n + exps.alpha)
    return RadialFn.from_function(grid, lambda r: (1.0 + r * r) ** -e)


def test_stereo_lift_lands_on_sphere():
    pts = np.array([[0.0, 0.0], [1.0, 2.0], [-3.0, 0.5]])
    xi = stereo_lift(pts)
    np.testing.assert_allclose(np.sum(xi * xi, axis=-1), 1.0)
    np.testing.assert_allclose(xi[0], [0.0, 0.0, 1.0])
    np.testing.assert_allclose(stereo_drop(xi), pts, atol=1e-14)


def test_stereo_drop_rejects_south_pole():
    with pytest.raises(ValueError, match="south pole"):
        stereo_drop([0.0, -1.0])


def test_chordal_distance():
    x, y = np.array([0.3, -1.0]), np.array([2.0, 0.5])
    direct = np.linalg.norm(stereo_lift(x) - stereo_lift(y))
    assert chordal(x, y) == pytest.approx(direct, rel=1e-12)
    assert chordal([0.0], [0.0]) == 0.0
    assert chordal([0.0], [1e8]) <= 2.0


def test_half_conformal_log_no_overflow():
    assert half_conformal_log(np.array([0.0]))[0] == pytest.approx(0.0)
    big = half_conformal_log(np.array([800.0]))[0]
    assert big == pytest.approx(1600.0 - math.log(2.0))


def test_lift_of_unit_extremal_is_constant():
    grid = log_grid(1, half_width=16.0, step=0.1)
    F = lift_function(_extremal(grid), EXPS)
    np.testing.assert_allclose(F.values, 2.0 ** -1.5, rtol=1e-12)
    assert F.origin.size == grid.size
    assert F.origin.step == pytest.approx(grid.step)
    assert F.weights.sum() == pytest.approx(sphere_area(1), rel=1e-6)


def test_lift_preserves_p_norm():
    exps = make_critical_exponents(2, 3)
    grid = log_grid(2, half_width=16.0, step=0.05)
    f = RadialFn.from_function(grid, lambda r: np.exp(-r) + (1.0 + r * r) ** -2.5)
    assert quasi_norm(lift_function(f, exps), exps.p) == pytest.approx(quasi_norm(f, exps.p), rel=1e-12)


def test_lift_on_narrow_grid_reports_caps(caplog):
    grid = log_grid(1, half_width=12.0)
    f = _extremal(grid)
    with caplog.at_level(logging.INFO, logger="rhls.geometry"):
        F = lift_function(f, EXPS, "q")
    share = F.missing_area / sphere_area(1)
    assert 0.0 < share < 1e-4
    assert "polar caps" in caplog.text
    np.testing.assert_allclose(drop_function(F, EXPS, "q").values, f.values, rtol=1e-12)


def test_lift_on_wide_grid_is_quiet(caplog):
    with caplog.at_level(logging.INFO, logger="rhls.geometry"):
        F = lift_function(_extremal(log_grid(1, half_width=24.0)), EXPS)
    assert abs(F.missing_area) < 1e-6 * sphere_area(1)
    assert "polar caps" not in caplog.text


def test_drop_inverts_lift():
    grid = log_grid(1, half_width=16.0, step=0.1)
    f = _extremal(grid)
    F = lift_function(f, EXPS, "q")
    back = drop_function(F, EXPS, "q")
    np.testing.assert_allclose(back.values, f.values, rtol=1e-12)


def test_drop_recovers_grid_without_origin():
    grid = log_grid(1, half_width=16.0, step=0.1)
    F = lift_function(_extremal(grid), EXPS)
    bare = ZonalFn(angles=F.angles, weights=F.weights, values=F.values, n=1)
    back = drop_function(bare, EXPS)
    np.testing.assert_allclose(back.log_radii, grid.log_radii, atol=1e-9)


def test_lift_rejects_dimension_mismatch():
    f = _extremal(log_grid(2, half_width=4.0, step=0.5))
    with pytest.raises(ValueError, match="R\\^2"):
        lift_function(f, EXPS)


def test_lift_rejects_unknown_kind():
    with pytest.raises(ValueError, match="Unknown weight kind"):
        lift_function(_extremal(log_grid(1, half_width=2.0, step=0.5)), EXPS, "r")


def test_dilate_by_shift_preserves_norm():
    grid = log_grid(1, half_width=12.0, step=0.05)
    f = _extremal(grid)
    g = dilate(f, 3.7, EXPS)
    assert quasi_norm(g, EXPS.p) == pytest.approx(quasi_norm(f, EXPS.p), rel=1e-12)
    np.testing.assert_allclose(g.log_radii, f.log_radii + math.log(3.7))


def test_dilate_stays_in_extremal_family():
    """lambda^{-n/p} f(x/lambda) is again c (|x|^2 + d^2)^{-(n+alpha)/2} with d = lambda."""
    grid = log_grid(1, half_width=6.0, step=0.1)
    lam = 2.0
    g = dilate(_extremal(grid), lam, EXPS)
    e = 0.5 * (EXPS.n + EXPS.alpha)
    expected = lam ** (2 * e - EXPS.n / EXPS.p) * (g.radii ** 2 + lam ** 2) ** -e
    np.testing.assert_allclose(g.values, expected, rtol=1e-12)


def test_dilate_regrid_integer_shift_is_exact():
    grid = log_grid(1, half_width=6.0, step=0.1)
    f = _extremal(grid)
    g = dilate(f, math.exp(0.5), EXPS, regrid=True)
    np.testing.assert_allclose(g.values[5:], math.exp(-0.5 * EXPS.n / EXPS.p) * f.values[:-5], rtol=1e-12)
    np.testing.assert_array_equal(g.values[:5], 0.0)


@pytest.mark.parametrize("beyond", [1, 7, -1, -7])
def test_dilate_regrid_past_the_grid_is_zero(beyond):
    grid = log_grid(1, half_width=3.0, step=0.1)
    f = _extremal(grid)
    k = grid.size + beyond if beyond > 0 else -grid.size + beyond
    g = dilate(f, math.exp(k * grid.step), EXPS, regrid=True)
    np.testing.assert_array_equal(g.values, 0.0)


def test_dilate_regrid_logs_lost_mass(caplog):
    grid = log_grid(1, half_width=3.0, step=0.1)
    f = _extremal(grid)
    assert dilation_loss(f, 10.0, EXPS) > 0.0
    with caplog.at_level(logging.WARNING, logger="rhls.geometry"):
        dilate(f, 10.0, EXPS, regrid=True)
    assert "off the grid" in caplog.text


def test_dilate_rejects_nonpositive_factor():
    with pytest.raises(ValueError, match="positive"):
        dilate(_extremal(log_grid(1, half_width=2.0, step=0.5)), 0.0, EXPS)


def test_kelvin_point_is_involution():
    kp = KelvinParams(center=[0.5, -0.2], radius=1.5)
    xi = np.array([[2.0, 1.0], [-0.3, 0.7]])
    np.testing.assert_allclose(kelvin_point(kelvin_point(xi, kp), kp), xi, rtol=1e-12)
    # the sphere itself is fixed
    on_sphere = kp.center + 1.5 * np.array([0.6, 0.8])
    np.testing.assert_allclose(kelvin_point(on_sphere, kp), on_sphere)


def test_kelvin_params_validation():
    with pytest.raises(ValueError, match="positive"):
        KelvinParams.at_origin(2, 0.0)
    with pytest.raises(ValueError, match="no Kelvin image"):
        kelvin_point([0.0, 0.0], KelvinParams.at_origin(2, 1.0))


def test_kelvin_self_inversion_of_profile():
    """(1 + r^2)^{(alpha-n)/2} is fixed by the inversion in the unit sphere."""
    grid = log_grid(1, half_width=8.0, step=0.05)
    s = 0.5 * (EXPS.alpha - EXPS.n)
    w = RadialFn.from_function(grid, lambda r: (1.0 + r * r) ** s)
    inverted = kelvin_transform(w, KelvinParams.at_origin(1, 1.0), EXPS)
    np.testing.assert_allclose(inverted.log_radii, w.log_radii, atol=1e-12)
    np.testing.assert_allclose(inverted.values, w.values, rtol=1e-12)


def test_kelvin_transform_lives_on_reflected_grid():
    grid = log_grid(2, half_width=4.0, step=0.25)
    exps = make_critical_exponents(2, 3)
    w = RadialFn.from_function(grid, lambda r: 1.0 + r)
    out = kelvin_transform(w, KelvinParams.at_origin(2, 2.0), exps)
    np.testing.assert_allclose(out.log_radii, 2.0 * math.log(2.0) - grid.log_radii[::-1], atol=1e-12)


def test_kelvin_transform_needs_origin_center():
    w = _extremal(log_grid(1, half_width=2.0, step=0.5))
    with pytest.raises(ValueError, match="origin"):
        kelvin_transform(w, KelvinParams(center=[1.0], radius=1.0), EXPS)


def test_kelvin_kernel_positive_outside_ball():
    rng = np.random.default_rng(3)
    for _ in range(50):
        xi = rng.normal(size=2)
        eta = rng.normal(size=2)
        xi *= (1.0 + rng.random()) / np.linalg.norm(xi)
        eta *= (1.0 + rng.random()) / np.linalg.norm(eta)
        assert kelvin_kernel([0.0, 0.0], 1.0, xi, eta, 2, 3.0) > 0.0

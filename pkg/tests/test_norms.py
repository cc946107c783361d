"""Tests for quasi-norms, sublevel distributions and the layer-cake route."""

import math

import numpy as np
import pytest

from rhls.core import SampledFn1D
from rhls.norms import (
    Distribution,
    chebyshev_bound_check,
    distribution_lt,
    layer_cake_integral,
    lp_quasi_norm,
    lr_norm_via_layer_cake,
    quasi_norm,
    weak_quasi_norm,
)


def test_lp_quasi_norm_positive_exponent():
    assert lp_quasi_norm([1.0, 4.0], [1.0, 1.0], 0.5) == pytest.approx(9.0)


def test_lp_quasi_norm_negative_exponent():
    assert lp_quasi_norm([1.0, 2.0], [1.0, 1.0], -1.0) == pytest.approx(1.0 / 1.5)


def test_lp_quasi_norm_zero_sample_negative_exponent():
    assert lp_quasi_norm([0.0, 2.0], [1.0, 1.0], -2.0) == 0.0


def test_lp_quasi_norm_rejects_bad_input():
    with pytest.raises(ValueError, match="nonzero"):
        lp_quasi_norm([1.0], [1.0], 0.0)
    with pytest.raises(ValueError, match="nonnegative"):
        lp_quasi_norm([-1.0], [1.0], 0.5)
    with pytest.raises(ValueError, match="shape"):
        lp_quasi_norm([1.0, 2.0], [1.0], 0.5)


def test_quasi_norm_not_subadditive():
    """The triangle inequality fails below exponent one."""
    f = SampledFn1D.uniform([1.0, 0.0])
    g = SampledFn1D.uniform([0.0, 1.0])
    total = f.with_values(f.values + g.values)
    assert quasi_norm(total, 0.5) > quasi_norm(f, 0.5) + quasi_norm(g, 0.5)


def test_distribution_of_step_function():
    g = SampledFn1D.uniform([1.0, 2.0, 3.0, 4.0])
    assert distribution_lt(g, 2.5) == pytest.approx(0.5)
    assert distribution_lt(g, 1.0) == pytest.approx(0.0)
    assert distribution_lt(g, 10.0) == pytest.approx(1.0)
    dist = Distribution.of(g)
    assert dist.breakpoints == (1.0, 2.0, 3.0, 4.0)
    assert dist.total == pytest.approx(1.0)


def test_distribution_lt_rejects_nonpositive_tau():
    with pytest.raises(ValueError):
        distribution_lt(SampledFn1D.uniform([1.0]), 0.0)


def test_layer_cake_closed_form():
    """g(x) = x on (0, 1) has ||g||_{-1/2}^{-1/2} = 2."""
    dist = Distribution(fn=lambda t: min(t, 1.0), total=1.0, lower=0.0, upper=1.0)
    assert layer_cake_integral(dist, -0.5) == pytest.approx(2.0, rel=1e-10)


def test_layer_cake_diverges_for_atom_at_zero():
    g = SampledFn1D.uniform([0.0, 1.0])
    assert math.isinf(layer_cake_integral(g, -1.0))
    assert lr_norm_via_layer_cake(g, -1.0) == 0.0


@pytest.mark.parametrize("r", [-0.5, -1.0, -2.0])
def test_layer_cake_matches_direct_sum(r):
    rng = np.random.default_rng(7)
    for _ in range(20):
        g = SampledFn1D.uniform(np.exp(rng.normal(size=16)))
        assert lr_norm_via_layer_cake(g, r) == pytest.approx(quasi_norm(g, r), rel=1e-6)


def test_layer_cake_rejects_positive_exponent():
    with pytest.raises(ValueError, match="r < 0"):
        layer_cake_integral(SampledFn1D.uniform([1.0]), 0.5)


def test_weak_quasi_norm_below_strong():
    g = SampledFn1D.uniform([1.0, 2.0, 5.0, 0.5])
    # weak L^r <= L^r for r < 0 means the quasi-norms order the other way
    assert weak_quasi_norm(g, -1.0) >= quasi_norm(g, -1.0) - 1e-12
    assert weak_quasi_norm(g, 0.5) <= quasi_norm(g, 0.5) + 1e-12


def test_weak_quasi_norm_constant():
    g = SampledFn1D.uniform([3.0, 3.0], 0.0, 2.0)
    assert weak_quasi_norm(g, -1.0) == pytest.approx(3.0 / 2.0)


def test_chebyshev_bound_check_passes():
    g = SampledFn1D.uniform([0.5, 1.0, 1.5, 2.0])
    report = chebyshev_bound_check(g, -2.0, [0.6, 1.2, 1.8, 5.0])
    assert report.passed
    assert report.provenance == "inequality"

"""Checkers for the reversed inequalities and the sharp-quotient machinery."""

from __future__ import annotations

import logging
import math
from typing import Iterable, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, computed_field

from .core import ExponentSet, RadialFn, SampledFn1D, ZonalFn
from .norms import lp_quasi_norm, quasi_norm
from .operators import radial_operator, sphere_operator, split_operator
from .reports import VerificationReport, compare, lower_bound
from .special import ball_volume, sharp_constant, sphere_area

logger = logging.getLogger(__name__)

Sampled = Union[ZonalFn, RadialFn, SampledFn1D]

EXACT_TOL = 1e-12
DISCRETE_TOL = 1e-3
QUOTIENT_TOL = 1e-6


class QuotientResult(BaseModel):
    """Q(F) = ||I F||_q / ||F||_p held against N*(n, alpha)."""

    model_config = ConfigDict(frozen=True)

    quotient: float
    sharp_constant: float
    margin: float
    relative_margin: float
    tolerance: float = QUOTIENT_TOL

    @computed_field  # type: ignore[prop-decorator]
    @property
    def holds(self) -> bool:
        return bool(self.relative_margin >= -self.tolerance)


def _quotient(value: float, constant: float, tolerance: float) -> QuotientResult:
    return QuotientResult(
        quotient=value,
        sharp_constant=constant,
        margin=value - constant,
        relative_margin=(value - constant) / constant,
        tolerance=tolerance,
    )


def lognormal_perturbation(
    base: np.ndarray, rng: np.random.Generator, sigma: float = 0.5, floor: float = 1e-6
) -> np.ndarray:
    """base * exp(sigma Z), clipped below at ``floor``."""
    return np.maximum(base * np.exp(sigma * rng.standard_normal(np.shape(base))), floor)


# --- Hoelder, Young, Minkowski ---


def _same_measure(f: Sampled, g: Sampled) -> np.ndarray:
    if f.weights.shape != g.weights.shape or not np.allclose(f.weights, g.weights, rtol=1e-12, atol=0.0):
        raise ValueError("both functions must live on one weighted grid")
    return f.weights


def reversed_holder_check(f: Sampled, g: Sampled, p: float) -> VerificationReport:
    """integral f g >= ||f||_p ||g||_{p'} for 0 < p < 1, p' = p/(p - 1) < 0."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"reversed Hoelder needs p in (0, 1), got {p!r}")
    w = _same_measure(f, g)
    p_conj = p / (p - 1.0)
    lhs = float(np.sum(w * f.values * g.values))
    norm_f = lp_quasi_norm(f.values, w, p)
    norm_g = lp_quasi_norm(g.values, w, p_conj)
    degenerate = norm_g == 0.0
    return lower_bound(
        "reversed_holder",
        lhs,
        norm_f * norm_g,
        EXACT_TOL,
        inputs={"p": p, "p_conjugate": p_conj},
        degenerate=degenerate,
        extra={"norm_f": norm_f, "norm_g": norm_g},
        notes="g vanishes somewhere, so ||g||_{p'} = 0" if degenerate else "",
    )


def _check_periodic_pair(g: SampledFn1D, h: SampledFn1D) -> None:
    if not (g.is_uniform and h.is_uniform):
        raise ValueError("periodic models need uniform cells")
    if g.breakpoints.shape != h.breakpoints.shape or not np.allclose(g.breakpoints, h.breakpoints):
        raise ValueError("both step functions must share one partition")


def _circular_convolution(g: np.ndarray, h: np.ndarray, width: float) -> np.ndarray:
    """(g * h) at the cell edges x_k = k * width of the circle, k = 0..N-1.

    For x = k width the cell i of g meets cell (k - 1 - i) mod N of h.
    """
    size = len(g)
    k = np.arange(size)[:, None]
    i = np.arange(size)[None, :]
    return width * np.sum(h[(k - 1 - i) % size] * g[None, :], axis=1)


def _piecewise_linear_power(edges: np.ndarray, width: float, r: float) -> float:
    """Exact integral of c^r where c is linear on each cell between consecutive edge values."""
    a = edges
    b = np.roll(edges, -1)
    if np.any(a <= 0.0):
        return math.inf if r < 0.0 else 0.0
    diff = b - a
    flat = np.abs(diff) <= 1e-9 * np.maximum(a, b)
    out = np.empty_like(a)
    mid = 0.5 * (a + b)
    out[flat] = width * mid[flat] ** r
    ramp = ~flat
    if r == -1.0:
        out[ramp] = width * (np.log(b[ramp]) - np.log(a[ramp])) / diff[ramp]
    else:
        out[ramp] = width * (b[ramp] ** (r + 1.0) - a[ramp] ** (r + 1.0)) / ((r + 1.0) * diff[ramp])
    return float(np.sum(out))


def periodic_convolution_norm(g: SampledFn1D, h: SampledFn1D, r: float) -> float:
    """||g * h||_r on the circle of length g.measure, integrated exactly."""
    _check_periodic_pair(g, h)
    width = float(g.widths[0])
    power = _piecewise_linear_power(_circular_convolution(g.values, h.values, width), width, r)
    if math.isinf(power):
        return 0.0
    if power == 0.0:
        return math.inf if r < 0.0 else 0.0
    return power ** (1.0 / r)


def converse_young_check(g: SampledFn1D, h: SampledFn1D, p: float, q: float) -> VerificationReport:
    """||g * h||_r >= ||g||_q ||h||_p with 0 < p < 1, q < 0 and 1/p + 1/q = 1 + 1/r, r < 0.

    Both functions are periodic step functions on one uniform partition;
    the convolution is piecewise linear and integrated exactly.
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p!r}")
    if not q < 0.0:
        raise ValueError(f"q must be negative, got {q!r}")
    inv_r = 1.0 / p + 1.0 / q - 1.0
    if not inv_r < 0.0:
        raise ValueError(f"1/p + 1/q - 1 = {inv_r!r} must be negative for r < 0")
    r = 1.0 / inv_r
    lhs = periodic_convolution_norm(g, h, r)
    norm_g = quasi_norm(g, q)
    norm_h = quasi_norm(h, p)
    degenerate = norm_g == 0.0 or math.isinf(lhs)
    return lower_bound(
        "converse_young",
        lhs,
        norm_g * norm_h,
        DISCRETE_TOL,
        inputs={"p": p, "q": q, "r": r, "cells": len(g.values)},
        degenerate=degenerate,
        extra={"norm_g_q": norm_g, "norm_h_p": norm_h},
    )


def reversed_minkowski_check(
    F: np.ndarray, mu: np.ndarray, nu: np.ndarray, q: float
) -> VerificationReport:
    """[int_Y (int_X F dmu)^q dnu]^{1/q} >= int_X (int_Y F^q dnu)^{1/q} dmu for q < 0.

    Rows of F index X (weights mu), columns index Y (weights nu).
    """
    if not q < 0.0:
        raise ValueError(f"reversed Minkowski is checked for q < 0, got {q!r}")
    F = np.asarray(F, dtype=float)
    mu = np.asarray(mu, dtype=float)
    nu = np.asarray(nu, dtype=float)
    if F.shape != (len(mu), len(nu)):
        raise ValueError(f"matrix shape {F.shape} does not match weights ({len(mu)}, {len(nu)})")
    if np.any(F < 0.0):
        raise ValueError("F must be nonnegative")
    inner_x = mu @ F
    lhs = lp_quasi_norm(inner_x, nu, q)
    row_norms = np.array([lp_quasi_norm(row, nu, q) for row in F])
    rhs = float(np.sum(mu * row_norms))
    degenerate = bool(np.any(~F.any(axis=0)) or np.any(~F.any(axis=1)))
    return lower_bound(
        "reversed_minkowski",
        lhs,
        rhs,
        EXACT_TOL,
        inputs={"q": q, "shape": list(F.shape)},
        degenerate=degenerate,
    )


# --- rearrangements ---


def decreasing_rearrangement(values: object, weights: Optional[object] = None) -> np.ndarray:
    """Nonincreasing rearrangement of ``values`` onto the cells in their given order.

    With equal weights this is a descending sort. Otherwise cell i receives
    the value whose sorted cumulative measure covers the center of cell i.
    """
    v = np.asarray(values, dtype=float)
    if np.any(v < 0.0):
        raise ValueError("rearrangements need nonnegative values")
    order = np.argsort(-v, kind="stable")
    if weights is None:
        return v[order]
    w = np.asarray(weights, dtype=float)
    if w.shape != v.shape or np.any(w <= 0.0):
        raise ValueError("weights must be positive and match the values")
    if np.allclose(w, w[0], rtol=1e-12, atol=0.0):
        return v[order]
    covered = np.cumsum(w[order])
    centers = np.cumsum(w) - 0.5 * w
    idx = np.minimum(np.searchsorted(covered, centers, side="left"), len(v) - 1)
    return v[order][idx]


def increasing_rearrangement(values: object, weights: Optional[object] = None) -> np.ndarray:
    """v_* = ((v^{-1})^*)^{-1}."""
    v = np.asarray(values, dtype=float)
    if np.any(v <= 0.0):
        raise ValueError("increasing rearrangement needs strictly positive values")
    return 1.0 / decreasing_rearrangement(1.0 / v, weights)


def radial_rearrangement(f: RadialFn) -> RadialFn:
    """Symmetric decreasing rearrangement of a radial function w.r.t. the R^n measure."""
    return f.with_values(decreasing_rearrangement(f.values, f.weights))


def _symmetric_half_cells(sorted_values: np.ndarray) -> np.ndarray:
    """Half-cell samples on [-L/2, L/2) of the symmetric arrangement of sorted values."""
    return np.concatenate([sorted_values[::-1], sorted_values])


def riesz_reversed_check(u: SampledFn1D, v: SampledFn1D, q: float) -> VerificationReport:
    """||u * v||_q >= ||u^* * v_*||_q on the circle, q < 0.

    u^* is the symmetric decreasing and v_* the symmetric increasing
    rearrangement about the origin. They are exact step functions on half
    cells; u and v are refined to the same half cells before convolving.
    """
    if not q < 0.0:
        raise ValueError(f"q must be negative, got {q!r}")
    _check_periodic_pair(u, v)
    if np.any(v.values <= 0.0):
        raise ValueError("v must be strictly positive")
    lo, hi = float(u.breakpoints[0]), float(u.breakpoints[-1])
    fine_u = SampledFn1D.uniform(np.repeat(u.values, 2), lo, hi)
    fine_v = SampledFn1D.uniform(np.repeat(v.values, 2), lo, hi)
    lhs = periodic_convolution_norm(fine_u, fine_v, q)
    star_u = SampledFn1D.uniform(_symmetric_half_cells(decreasing_rearrangement(u.values)), lo, hi)
    star_v = SampledFn1D.uniform(_symmetric_half_cells(increasing_rearrangement(v.values)), lo, hi)
    rhs = periodic_convolution_norm(star_u, star_v, q)
    return lower_bound(
        "riesz_reversed",
        lhs,
        rhs,
        DISCRETE_TOL,
        inputs={"q": q, "cells": len(u.values)},
        degenerate=lhs == 0.0 or math.isinf(rhs),
    )


# --- sharp quotient ---


def hls_quotient(F: ZonalFn, exps: ExponentSet, tolerance: float = QUOTIENT_TOL) -> QuotientResult:
    """Q(F) = ||I~ F||_q / ||F||_p on the sphere against N*."""
    if not np.any(F.values > 0.0):
        raise ValueError("the quotient is undefined for F = 0")
    image = sphere_operator(F, exps)
    value = quasi_norm(image, exps.q) / quasi_norm(F, exps.p)
    logger.debug("hls quotient %.12g on %d nodes", value, len(F.values))
    return _quotient(value, sharp_constant(exps.n, exps.alpha).value, tolerance)


def bilinear_form(
    F: ZonalFn, G: ZonalFn, exps: ExponentSet, tolerance: float = QUOTIENT_TOL
) -> VerificationReport:
    """double integral F(xi) |xi - eta|^{alpha-n} G(eta) >= N* ||F||_p ||G||_t."""
    if F.weights.shape != G.weights.shape or not np.allclose(F.weights, G.weights, rtol=1e-12, atol=0.0):
        raise ValueError("F and G must share one zonal grid")
    image_f = sphere_operator(F, exps)
    image_g = sphere_operator(G, exps)
    lhs = float(np.sum(F.weights * G.values * image_f.values))
    adjoint = float(np.sum(F.weights * F.values * image_g.values))
    constant = sharp_constant(exps.n, exps.alpha).value
    norm_f = quasi_norm(F, exps.p)
    norm_g = quasi_norm(G, exps.t)
    return lower_bound(
        "bilinear",
        lhs,
        constant * norm_f * norm_g,
        tolerance,
        inputs={"n": exps.n, "alpha": exps.alpha},
        extra={"adjoint_lhs": adjoint, "n_star": constant},
    )


def strong_type_quotient(f: RadialFn, exps: ExponentSet) -> VerificationReport:
    """||I f||_q / ||f||_p on R^n; positive for every admissible p, at least N* when critical."""
    norm_f = quasi_norm(f, exps.p)
    if norm_f == 0.0:
        raise ValueError("the quotient is undefined for f = 0")
    value = quasi_norm(radial_operator(f, exps), exps.q) / norm_f
    bound = sharp_constant(exps.n, exps.alpha).value if exps.is_critical else 0.0
    return lower_bound(
        "strong_type",
        value,
        bound,
        QUOTIENT_TOL,
        inputs={"n": exps.n, "alpha": exps.alpha, "p": exps.p, "q": exps.q},
        degenerate=not math.isfinite(value),
        extra={"quotient": value},
    )


def rough_bilinear_check(f: RadialFn, g: RadialFn, exps: ExponentSet) -> VerificationReport:
    """<I f, g> >= ||I f||_q ||g||_t on the radial grid (q and t are conjugate)."""
    w = _same_measure(f, g)
    image = radial_operator(f, exps)
    pairing = float(np.sum(w * image.values * g.values))
    norm_image = quasi_norm(image, exps.q)
    norm_g = quasi_norm(g, exps.t)
    norm_f = quasi_norm(f, exps.p)
    return lower_bound(
        "rough_bilinear",
        pairing,
        norm_image * norm_g,
        EXACT_TOL,
        inputs={"n": exps.n, "alpha": exps.alpha, "p": exps.p},
        extra={"quotient": pairing / (norm_f * norm_g) if norm_f * norm_g > 0.0 else math.inf},
    )


def rearrangement_operator_check(f: RadialFn, exps: ExponentSet, tolerance: float = 1e-4) -> VerificationReport:
    """||I f||_q >= ||I f^*||_q for radial f."""
    lhs = quasi_norm(radial_operator(f, exps), exps.q)
    rhs = quasi_norm(radial_operator(radial_rearrangement(f), exps), exps.q)
    return lower_bound(
        "rearrangement_operator", lhs, rhs, tolerance, inputs={"n": exps.n, "alpha": exps.alpha}
    )


# --- weak type ---


def sublevel_measure(h: RadialFn, tau: float) -> float:
    """meas{h < tau} for radial h, linear in u between nodes, constant inside the innermost ball.

    Returns inf when the sublevel set reaches the outer edge of the grid.
    """
    v = h.values
    if v[-1] < tau:
        return math.inf
    n = h.n
    u = h.log_radii
    total = ball_volume(n) * math.exp(n * u[0]) if v[0] < tau else 0.0
    shell = sphere_area(n - 1) / n
    a, b = v[:-1], v[1:]
    ua, ub = u[:-1], u[1:]
    below_a, below_b = a < tau, b < tau
    with np.errstate(divide="ignore", invalid="ignore"):
        cross = ua + (tau - a) / (b - a) * (ub - ua)
    lo = np.where(below_a, ua, cross)
    hi = np.where(below_b, ub, cross)
    inside = below_a | below_b
    lo, hi = lo[inside], hi[inside]
    total += float(np.sum(shell * (np.exp(n * hi) - np.exp(n * lo))))
    return total


def _node_sublevel(h: RadialFn, tau: float) -> float:
    return float(np.sum(h.weights[h.values < tau]))


def _weak_constant(image: RadialFn, q: float, taus: np.ndarray) -> tuple:
    best, best_tau = math.inf, float("nan")
    for tau in taus:
        measure = sublevel_measure(image, tau)
        if measure == 0.0 or math.isinf(measure):
            continue
        value = tau * measure ** (1.0 / q)
        if value < best:
            best, best_tau = value, float(tau)
    return best, best_tau


def weak_type_constant(
    f: RadialFn, exps: ExponentSet, taus: Optional[Iterable[float]] = None
) -> VerificationReport:
    """Empirical constant of meas{I f < tau} <= (C ||f||_p / tau)^q.

    For q < 0 the bound holds exactly for C <= tau meas{I f < tau}^{1/q} / ||f||_p,
    so the best constant is the infimum of that combination over tau. The
    sweep is repeated on a refined tau grid and the two values compared.
    """
    norm_f = quasi_norm(f, exps.p)
    if norm_f == 0.0:
        raise ValueError("weak-type constant is undefined for f = 0")
    image = radial_operator(f, exps)
    if taus is None:
        positive = image.values[image.values > 0.0]
        lo, hi = float(positive.min()), float(image.values[-1])
        taus = np.geomspace(lo, hi, 401)[1:-1]
    taus = np.asarray(list(taus), dtype=float)
    if taus.size == 0 or np.any(taus <= 0.0):
        raise ValueError(f"taus must be a nonempty list of positive levels, got {taus.tolist()!r}")
    coarse, _ = _weak_constant(image, exps.q, taus)
    fine_taus = np.geomspace(taus[0], taus[-1], 4 * len(taus) - 3)
    fine, tau_star = _weak_constant(image, exps.q, fine_taus)
    sup = fine
    constant = fine / norm_f
    report = compare(
        "weak_type",
        constant,
        coarse / norm_f,
        DISCRETE_TOL,
        inputs={"n": exps.n, "alpha": exps.alpha, "p": exps.p, "taus": len(taus)},
        provenance="cross-check",
        extra={"sup": sup, "constant": constant, "tau_star": tau_star, "norm_f": norm_f},
    )
    if not (math.isfinite(constant) and constant > 0.0):
        return report.model_copy(update={"rel_error": math.inf, "notes": "no finite constant"})
    return report


def weak_type_split_check(f: RadialFn, tau: float, exps: ExponentSet) -> VerificationReport:
    """meas{I f < 2 tau} <= meas{I^1 f < tau} + meas{I^2 f < tau} with rho = tau^{p/(p alpha - n)}.

    Measures are node sums, so the set inclusion carries over exactly.
    """
    if not tau > 0.0:
        raise ValueError(f"tau must be positive, got {tau!r}")
    rho = tau ** (exps.p / (exps.p * exps.alpha - exps.n))
    full = radial_operator(f, exps)
    near = split_operator(f, rho, "near", exps)
    far = split_operator(f, rho, "far", exps)
    union = _node_sublevel(near, tau) + _node_sublevel(far, tau)
    return lower_bound(
        "weak_type_split",
        union,
        _node_sublevel(full, 2.0 * tau),
        EXACT_TOL,
        inputs={"tau": tau, "rho": rho},
    )

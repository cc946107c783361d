"""Quasi-norms for exponents below one, sublevel distributions and the layer-cake route."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Tuple, Union

import numpy as np
from scipy import integrate

from .core import RadialFn, SampledFn1D, ZonalFn
from .reports import VerificationReport, lower_bound

logger = logging.getLogger(__name__)

Sampled = Union[ZonalFn, RadialFn, SampledFn1D]


def _check_exponent(r: float) -> None:
    if r == 0.0 or not math.isfinite(r):
        raise ValueError(f"exponent must be finite and nonzero, got {r!r}")


def lp_quasi_norm(values: object, weights: object, r: float) -> float:
    """(sum w_i v_i^r)^{1/r} for r in (0, 1) or r < 0.

    For r < 0 a zero sample makes the sum infinite and the result 0.
    """
    _check_exponent(r)
    v = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float)
    if v.shape != w.shape:
        raise ValueError("values and weights must share one shape")
    if np.any(v < 0.0):
        raise ValueError("quasi-norms need nonnegative values")
    if np.any(w <= 0.0):
        raise ValueError("weights must be positive")
    if r < 0.0 and np.any(v == 0.0):
        return 0.0
    total = float(np.sum(w * v ** r))
    if total == 0.0:
        return 0.0
    return total ** (1.0 / r)


def quasi_norm(fn: Sampled, r: float) -> float:
    """Quasi-norm of a sampled container with its own measure weights."""
    return lp_quasi_norm(fn.values, fn.weights, r)


@dataclass(frozen=True)
class Distribution:
    """Sublevel measure t -> meas{g < t}.

    ``lower`` and ``upper`` bracket the range of g: the measure is
    ``atom_at_zero`` below ``lower`` and ``total`` above ``upper``.
    """

    fn: Callable[[float], float]
    total: float
    lower: float
    upper: float
    breakpoints: Tuple[float, ...] = field(default=())
    atom_at_zero: float = 0.0

    def __call__(self, t: float) -> float:
        return float(self.fn(t))

    @classmethod
    def of(cls, g: Sampled) -> "Distribution":
        """Exact distribution of the piecewise-constant model of g."""
        order = np.argsort(g.values, kind="stable")
        v = g.values[order]
        cum = np.concatenate([[0.0], np.cumsum(g.weights[order])])

        def measure(t: float) -> float:
            return float(cum[np.searchsorted(v, t, side="left")])

        levels = np.unique(v)
        return cls(
            fn=measure,
            total=float(cum[-1]),
            lower=float(levels[0]),
            upper=float(levels[-1]),
            breakpoints=tuple(float(x) for x in levels),
            atom_at_zero=float(np.sum(g.weights[g.values == 0.0])),
        )


def distribution_lt(g: Union[Sampled, Distribution], tau: float) -> float:
    """meas{g < tau} under the piecewise-constant model."""
    if not tau > 0.0:
        raise ValueError(f"tau must be positive, got {tau!r}")
    dist = g if isinstance(g, Distribution) else Distribution.of(g)
    return dist(tau)


def layer_cake_integral(g: Union[Sampled, Distribution], r: float) -> float:
    """|r| * integral_0^inf t^{r-1} meas{g < t} dt, which equals ||g||_r^r for r < 0.

    Integration is adaptive between the level breakpoints; above the top
    level the measure is constant and the tail is added in closed form.
    Returns +inf when the integral diverges at t = 0.
    """
    if not r < 0.0:
        raise ValueError(f"layer-cake route needs r < 0, got {r!r}")
    dist = g if isinstance(g, Distribution) else Distribution.of(g)
    if dist.atom_at_zero > 0.0:
        return math.inf

    body = 0.0
    if dist.breakpoints:
        levels = dist.breakpoints
        for lo, hi in zip(levels[:-1], levels[1:]):
            # constant measure meas{g <= lo} on (lo, hi]
            value, _ = integrate.quad(
                lambda t: t ** (r - 1.0), lo, hi, epsabs=0.0, epsrel=1e-13, limit=100
            )
            body += dist(hi) * value
    elif dist.upper > dist.lower:
        # a measure vanishing like a power at t = 0 leaves an integrable endpoint singularity
        body, _ = integrate.quad(
            lambda t: t ** (r - 1.0) * dist(t),
            dist.lower, dist.upper, epsabs=0.0, epsrel=1e-12, limit=200,
        )
    tail = dist.total * dist.upper ** r
    return abs(r) * body + tail


def lr_norm_via_layer_cake(g: Union[Sampled, Distribution], r: float) -> float:
    """||g||_r for r < 0 computed through the distribution function."""
    power = layer_cake_integral(g, r)
    if math.isinf(power):
        logger.debug("layer-cake integral diverges at t = 0; quasi-norm is 0")
        return 0.0
    return power ** (1.0 / r)


def weak_quasi_norm(g: Sampled, r: float) -> float:
    """Weak quasi-norm of a sampled nonnegative function.

    r > 0: sup_t t * meas{g > t}^{1/r}.
    r < 0: (sup_t meas{g < t} t^r)^{1/r}, the smallest B with m(t) t^r <= B.
    For a step function both suprema sit at the level values, approached
    from the appropriate side.
    """
    _check_exponent(r)
    v = g.values
    w = g.weights
    levels = np.unique(v)
    if r > 0.0:
        best = 0.0
        for level in levels[levels > 0.0]:
            best = max(best, float(level) * float(np.sum(w[v >= level])) ** (1.0 / r))
        return best
    if np.any(w[v == 0.0]):
        return 0.0
    sup = max(float(np.sum(w[v <= level])) * float(level) ** r for level in levels)
    return sup ** (1.0 / r)


def chebyshev_bound_check(g: Sampled, r: float, taus: Iterable[float]) -> VerificationReport:
    """meas{g < tau} <= ||g||_r^r / tau^r for every tau (r < 0)."""
    if not r < 0.0:
        raise ValueError(f"Chebyshev-type bound is stated for r < 0, got {r!r}")
    dist = Distribution.of(g)
    power = float(np.sum(g.weights * g.values ** r)) if np.all(g.values > 0.0) else math.inf
    worst_bound, worst_measure, worst_tau = math.inf, 0.0, float("nan")
    for tau in taus:
        measure = distribution_lt(dist, tau)
        bound = power / tau ** r
        if bound - measure < worst_bound - worst_measure:
            worst_bound, worst_measure, worst_tau = bound, measure, float(tau)
    return lower_bound(
        "chebyshev_sublevel_bound",
        worst_bound,
        worst_measure,
        1e-12,
        inputs={"r": r, "tau": worst_tau},
    )

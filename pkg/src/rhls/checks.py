"""Registry of seeded verification checks behind ``rhls verify``."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from .config import ordered_map
from .core import ExponentSet, RadialFn, SampledFn1D, ZonalFn, make_critical_exponents
from .extremal import (
    ExtremalParamsRn,
    ExtremalParamsSphere,
    asymptotic_coeffs,
    el_amplitude_integral,
    el_pair,
    el_residual,
    extremal_rn,
    extremal_sphere,
    integrability_check,
    kelvin_identity_check,
    moving_sphere_check,
    solve_el_pair,
)
from .geometry import KelvinParams, dilate, kelvin_transform, lift_function
from .inequalities import (
    QUOTIENT_TOL,
    bilinear_form,
    converse_young_check,
    hls_quotient,
    lognormal_perturbation,
    reversed_holder_check,
    reversed_minkowski_check,
    riesz_reversed_check,
    strong_type_quotient,
    weak_type_constant,
    weak_type_split_check,
)
from .norms import Distribution, layer_cake_integral, lr_norm_via_layer_cake, quasi_norm
from .operators import radial_operator
from .quadrature import log_grid, zonal_grid
from .reports import VerificationReport, compare, lower_bound
from .special import extremal_image_amplitude

logger = logging.getLogger(__name__)

CheckFn = Callable[[int, float, int], List[VerificationReport]]

# Exponents of the periodic converse-Young model: 1/p + 1/q = 1 + 1/r with r = -2.
YOUNG_P = 2.0 / 3.0
YOUNG_Q = -1.0

LAYER_CAKE_EXPONENTS = (-0.5, -1.0, -2.0)

_CELLS = 32
_SPHERE_NODES = 96


@dataclass(frozen=True)
class CheckDefinition:
    """A named check and the function producing its reports."""

    name: str
    description: str
    func: CheckFn

    def execute(self, n: int, alpha: float, seed: int) -> List[VerificationReport]:
        reports = self.func(n, alpha, seed)
        return [
            r.model_copy(update={"inputs": {**r.inputs, "check": self.name, "seed": seed}})
            for r in reports
        ]


class CheckRegistry:
    """Stores registered checks in registration order."""

    def __init__(self) -> None:
        self._checks: Dict[str, CheckDefinition] = {}

    def register(self, name: str, func: CheckFn) -> CheckDefinition:
        defn = CheckDefinition(name=name, description=(func.__doc__ or "").strip(), func=func)
        self._checks[name] = defn
        return defn

    def get(self, name: str) -> CheckDefinition:
        defn = self._checks.get(name)
        if defn is None:
            raise ValueError(f"Unknown check: {name!r}. Use one of {', '.join(self.names())} or 'all'.")
        return defn

    def names(self) -> List[str]:
        return list(self._checks)

    def resolve(self, which: Sequence[str]) -> List[str]:
        """Expand ``all`` and validate the remaining names."""
        if not which or "all" in which:
            return self.names()
        return [self.get(name).name for name in which]

    def run(
        self,
        names: Sequence[str],
        n: int,
        alpha: float,
        seeds: Sequence[int],
        threads: Optional[int] = None,
    ) -> List[VerificationReport]:
        """Run every named check for every seed.

        Seeds of one check run through the ordered pool, so the report order
        depends only on ``names`` and ``seeds``.
        """
        reports: List[VerificationReport] = []
        for name in self.resolve(names):
            defn = self.get(name)
            logger.info("running check %s over %d seeds", name, len(seeds))
            batches = ordered_map(lambda seed: defn.execute(n, alpha, seed), list(seeds), threads)
            for batch in batches:
                reports.extend(batch)
        return reports


REGISTRY = CheckRegistry()


def check(name: str) -> Callable[[CheckFn], CheckFn]:
    """Decorator that adds a check to the default registry.

    Usage:
        @check("holder")
        def holder(n: int, alpha: float, seed: int) -> List[VerificationReport]:
            ...
    """

    def decorator(func: CheckFn) -> CheckFn:
        func._check_definition = REGISTRY.register(name, func)  # type: ignore[attr-defined]
        return func

    return decorator


def _rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def _random_step(rng: np.random.Generator, cells: int = _CELLS) -> SampledFn1D:
    return SampledFn1D.uniform(lognormal_perturbation(np.ones(cells), rng), 0.0, 1.0)


def _random_zonal(rng: np.random.Generator, exps: ExponentSet) -> ZonalFn:
    grid = zonal_grid(exps.n, _SPHERE_NODES)
    return ZonalFn.on_grid(grid, lognormal_perturbation(np.ones(grid.size), rng))


def _random_extremal(rng: np.random.Generator, exps: ExponentSet) -> RadialFn:
    params = ExtremalParamsRn(c=float(rng.uniform(0.5, 2.0)), d=float(math.exp(rng.uniform(-1.0, 1.0))))
    return extremal_rn(params, log_grid(exps.n), exps)


# --- inequality suite on the line and the circle ---


@check("holder")
def holder(n: int, alpha: float, seed: int) -> List[VerificationReport]:
    """Reversed Hoelder on random positive step functions."""
    exps = make_critical_exponents(n, alpha)
    rng = _rng(seed)
    return [reversed_holder_check(_random_step(rng), _random_step(rng), exps.p)]


@check("young")
def young(n: int, alpha: float, seed: int) -> List[VerificationReport]:
    """Converse Young on the circle, (p, q, r) = (2/3, -1, -2)."""
    rng = _rng(seed)
    return [converse_young_check(_random_step(rng), _random_step(rng), YOUNG_P, YOUNG_Q)]


@check("minkowski")
def minkowski(n: int, alpha: float, seed: int) -> List[VerificationReport]:
    """Reversed Minkowski on a random positive matrix with random weights."""
    exps = make_critical_exponents(n, alpha)
    rng = _rng(seed)
    F = lognormal_perturbation(np.ones((8, 6)), rng)
    mu = rng.uniform(0.1, 1.0, size=8)
    nu = rng.uniform(0.1, 1.0, size=6)
    return [reversed_minkowski_check(F, mu, nu, exps.q)]


@check("riesz")
def riesz(n: int, alpha: float, seed: int) -> List[VerificationReport]:
    """Reversed Riesz rearrangement on the circle."""
    exps = make_critical_exponents(n, alpha)
    rng = _rng(seed)
    return [riesz_reversed_check(_random_step(rng), _random_step(rng), exps.q)]


# --- the sharp inequality on the sphere ---


@check("hls")
def hls(n: int, alpha: float, seed: int) -> List[VerificationReport]:
    """Q(F) >= N* for a random F, and equality on a random extremal."""
    exps = make_critical_exponents(n, alpha)
    rng = _rng(seed)
    result = hls_quotient(_random_zonal(rng, exps), exps)
    random_report = lower_bound(
        "hls_quotient",
        result.quotient,
        result.sharp_constant,
        QUOTIENT_TOL,
        inputs={"n": n, "alpha": alpha},
        extra={"relative_margin": result.relative_margin},
    )
    params = ExtremalParamsSphere(a=float(rng.uniform(0.5, 2.0)), eta=float(rng.uniform(-0.6, 0.6)))
    extremal = extremal_sphere(params, zonal_grid(n), exps)
    equality = hls_quotient(extremal, exps)
    equality_report = compare(
        "hls_equality",
        equality.quotient,
        equality.sharp_constant,
        1e-4,
        inputs={"n": n, "alpha": alpha, "a": params.a, "eta": params.eta},
    )
    return [random_report, equality_report]


@check("bilinear")
def bilinear(n: int, alpha: float, seed: int) -> List[VerificationReport]:
    """Bilinear form against N* ||F||_p ||G||_t on random pairs."""
    exps = make_critical_exponents(n, alpha)
    rng = _rng(seed)
    return [bilinear_form(_random_zonal(rng, exps), _random_zonal(rng, exps), exps)]


# --- R^n ---


@check("weaktype")
def weaktype(n: int, alpha: float, seed: int) -> List[VerificationReport]:
    """Weak-type constant, the near/far split inclusion and the strong-type quotient."""
    exps = make_critical_exponents(n, alpha)
    rng = _rng(seed)
    f = _random_extremal(rng, exps)
    image = radial_operator(f, exps)
    tau = float(np.quantile(image.values, rng.uniform(0.2, 0.8)))
    return [
        weak_type_constant(f, exps),
        weak_type_split_check(f, tau, exps),
        strong_type_quotient(f, exps),
    ]


def _identity_distribution() -> Distribution:
    # g(x) = x on (0, 1): meas{g < t} = min(t, 1)
    return Distribution(fn=lambda t: min(max(t, 0.0), 1.0), total=1.0, lower=0.0, upper=1.0)


@check("layercake")
def layercake(n: int, alpha: float, seed: int) -> List[VerificationReport]:
    """Both routes to ||g||_r for r < 0: direct sum and the distribution integral."""
    rng = _rng(seed)
    reports = [
        compare("layer_cake_closed_form", layer_cake_integral(_identity_distribution(), -0.5), 2.0, 1e-6)
    ]
    g = _random_step(rng)
    for r in LAYER_CAKE_EXPONENTS:
        reports.append(
            compare(
                "layer_cake",
                lr_norm_via_layer_cake(g, r),
                quasi_norm(g, r),
                1e-6,
                inputs={"r": r},
                provenance="identity",
            )
        )
    return reports


@check("transport")
def transport(n: int, alpha: float, seed: int) -> List[VerificationReport]:
    """Norm transport to the sphere, dilation invariance and Kelvin self-inversion."""
    exps = make_critical_exponents(n, alpha)
    rng = _rng(seed)
    f = _random_extremal(rng, exps)
    inputs = {"n": n, "alpha": alpha}

    lifted = lift_function(f, exps, "p")
    image = radial_operator(f, exps)
    reports = [
        compare("norm_transport_p", quasi_norm(lifted, exps.p), quasi_norm(f, exps.p), 1e-5,
                inputs=inputs, provenance="identity"),
        compare("norm_transport_q", quasi_norm(lift_function(image, exps, "q"), exps.q),
                quasi_norm(image, exps.q), 1e-5, inputs=inputs, provenance="identity"),
    ]

    lam = float(math.exp(rng.uniform(-2.0, 2.0)))
    dilated = dilate(f, lam, exps)
    reports.append(
        compare("dilation_norm", quasi_norm(dilated, exps.p), quasi_norm(f, exps.p), 1e-5,
                inputs={**inputs, "lambda": lam}, provenance="identity")
    )
    reports.append(
        compare(
            "dilation_quotient",
            quasi_norm(radial_operator(dilated, exps), exps.q) / quasi_norm(dilated, exps.p),
            quasi_norm(image, exps.q) / quasi_norm(f, exps.p),
            1e-5,
            inputs={**inputs, "lambda": lam},
            provenance="identity",
        )
    )

    unit = el_pair(1.0, 1.0, 1.0, log_grid(n), exps).u
    inverted = kelvin_transform(unit, KelvinParams.at_origin(n, 1.0), exps)
    reports.append(
        compare(
            "kelvin_self_inversion",
            float(np.max(np.abs(inverted.values - unit.values) / unit.values)),
            0.0,
            1e-12,
            inputs={**inputs, "lambda": 1.0},
            provenance="identity",
            error_kind="absolute",
        )
    )
    return reports


# --- Euler-Lagrange system ---


@check("el")
def el(n: int, alpha: float, seed: int) -> List[VerificationReport]:
    """Closed-form solution of the integral system, its asymptotics and moving-sphere behavior."""
    exps = make_critical_exponents(n, alpha)
    rng = _rng(seed)
    grid = log_grid(n)
    d = float(math.exp(rng.uniform(-0.5, 0.5)))
    pair = solve_el_pair(d, exps, grid)

    reports = [
        compare("el_amplitude_oracle", el_amplitude_integral(1.0, exps),
                extremal_image_amplitude(n, alpha), 1e-8, provenance="oracle"),
        el_residual(pair),
        *asymptotic_coeffs(pair).reports(),
        integrability_check(pair),
        compare("el_bounds_constant", pair.bounds_constant(), 0.0, 10.0, error_kind="absolute",
                notes="two-sided bound constant C"),
    ]

    unit = el_pair(1.0, 1.0, 1.0, grid, exps)
    # lam on the grid, so the reflected nodes coincide with grid nodes
    k = int(rng.integers(1, 64))
    lam = math.exp(-k * grid.step)
    reports.append(moving_sphere_check(unit.u, lam, exps))
    reports.append(moving_sphere_check(unit.u, 1.0, exps))
    reports.append(kelvin_identity_check(pair, d))
    return reports


__all__ = [
    "CheckDefinition",
    "CheckRegistry",
    "REGISTRY",
    "check",
]

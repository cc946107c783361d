"""Extremal families, the Euler-Lagrange integral system and the fixed-point minimizer."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator
from scipy import integrate

from .core import ExponentSet, RadialFn, ZonalFn
from .geometry import KelvinParams, kelvin_transform
from .inequalities import hls_quotient
from .norms import quasi_norm
from .operators import radial_operator, sphere_operator
from .quadrature import LogGrid, ZonalGrid, log_grid
from .reports import VerificationReport, compare, lower_bound
from .special import sharp_constant, sphere_area

logger = logging.getLogger(__name__)

EL_TOL = 1e-3


class ConvergenceError(RuntimeError):
    """A scalar reduction or iteration could not produce a solution."""


class ExtremalParamsSphere(BaseModel):
    """a (1 - xi . eta)^{-(n+alpha)/2} with eta = height * north pole."""

    model_config = ConfigDict(frozen=True)

    a: float = Field(gt=0.0)
    eta: float = 0.0

    @field_validator("eta")
    @classmethod
    def _inside_ball(cls, value: float) -> float:
        if not abs(value) < 1.0:
            raise ValueError(f"|eta| must be below 1, got {value!r}")
        return value


class ExtremalParamsRn(BaseModel):
    """c (|x - x0|^2 + d^2)^{-(n+alpha)/2}; radial grids need x0 = 0."""

    model_config = ConfigDict(frozen=True)

    c: float = Field(gt=0.0)
    d: float = Field(gt=0.0)
    x0: float = 0.0

    def to_sphere(self, exps: ExponentSet) -> ExtremalParamsSphere:
        """Parameters of the lifted function (``lift_function`` with kind "p")."""
        self._require_centered()
        e = 0.5 * (exps.n + exps.alpha)
        return ExtremalParamsSphere(
            a=self.c * (1.0 + self.d ** 2) ** (-e),
            eta=(1.0 - self.d ** 2) / (1.0 + self.d ** 2),
        )

    @classmethod
    def from_sphere(cls, params: ExtremalParamsSphere, exps: ExponentSet) -> "ExtremalParamsRn":
        e = 0.5 * (exps.n + exps.alpha)
        d2 = (1.0 - params.eta) / (1.0 + params.eta)
        return cls(c=params.a * (1.0 + d2) ** e, d=math.sqrt(d2))

    def _require_centered(self) -> None:
        if self.x0 != 0.0:
            raise ValueError(f"radial representation needs x0 = 0, got {self.x0!r}")


def extremal_sphere(
    params: ExtremalParamsSphere, grid: Union[ZonalGrid, ZonalFn], exps: ExponentSet
) -> ZonalFn:
    """Sample a (1 - eta cos(theta))^{-(n+alpha)/2} on a zonal grid.

    A ZonalFn template keeps its lifted origin, so the result can be dropped
    back to R^n.
    """
    e = 0.5 * (exps.n + exps.alpha)
    values = params.a * (1.0 - params.eta * np.cos(grid.angles)) ** (-e)
    if isinstance(grid, ZonalFn):
        return grid.with_values(values)
    return ZonalFn.on_grid(grid, values)


def extremal_rn(params: ExtremalParamsRn, grid: LogGrid, exps: ExponentSet) -> RadialFn:
    """Sample c (r^2 + d^2)^{-(n+alpha)/2} on a log grid."""
    params._require_centered()
    u = grid.log_radii
    e = 0.5 * (exps.n + exps.alpha)
    log_values = math.log(params.c) - e * np.logaddexp(2.0 * u, 2.0 * math.log(params.d))
    return RadialFn.on_grid(grid, np.exp(log_values))


def concentration_family(eps: float, exps: ExponentSet) -> ExtremalParamsRn:
    """f_eps(x) = (eps / (eps^2 + |x|^2))^{(n+alpha)/2}."""
    if not eps > 0.0:
        raise ValueError(f"eps must be positive, got {eps!r}")
    return ExtremalParamsRn(c=eps ** (0.5 * (exps.n + exps.alpha)), d=eps)


# --- the integral system ---


def _require_critical(exps: ExponentSet) -> None:
    if not exps.is_critical:
        raise ValueError(f"the integral system is stated at the critical exponents, got p={exps.p!r}")


@dataclass(frozen=True)
class ELPair:
    """Positive radial pair (u, v) for u = |x|^{alpha-n} * v^kappa, v = |x|^{alpha-n} * u^theta."""

    u: RadialFn
    v: RadialFn
    exps: ExponentSet
    a: Optional[float] = None
    b: Optional[float] = None

    def __post_init__(self) -> None:
        _require_critical(self.exps)
        if np.any(self.u.values <= 0.0) or np.any(self.v.values <= 0.0):
            raise ValueError("an Euler-Lagrange pair must be strictly positive")
        if not np.array_equal(self.u.log_radii, self.v.log_radii):
            raise ValueError("u and v must share one grid")

    def bounds_constant(self) -> float:
        """Smallest C with (1 + r^{alpha-n})/C <= u <= C (1 + r^{alpha-n}) on the grid."""
        r = self.u.radii
        profile = 1.0 + r ** (self.exps.alpha - self.exps.n)
        ratio = self.u.values / profile
        return float(max(ratio.max(), 1.0 / ratio.min()))


def el_pair(c1: float, c2: float, d: float, grid: LogGrid, exps: ExponentSet) -> ELPair:
    """Closed-form pair u = c1 (r^2 + d^2)^{(alpha-n)/2}, v = c2 (r^2 + d^2)^{(alpha-n)/2}."""
    _require_critical(exps)
    u = grid.log_radii
    s = 0.5 * (exps.alpha - exps.n)
    shape = np.exp(s * np.logaddexp(2.0 * u, 2.0 * math.log(d)))
    return ELPair(u=RadialFn.on_grid(grid, c1 * shape), v=RadialFn.on_grid(grid, c2 * shape), exps=exps)


def _central(fn: RadialFn) -> np.ndarray:
    grid = fn.grid
    return np.abs(fn.log_radii - grid.center) <= 0.5 * grid.half_width


def _relative_residual(computed: RadialFn, target: RadialFn) -> float:
    mask = _central(target)
    return float(np.max(np.abs(computed.values[mask] - target.values[mask]) / target.values[mask]))


def el_residual(pair: ELPair, tolerance: float = EL_TOL) -> VerificationReport:
    """Largest relative residual of both equations over the central half of the grid."""
    exps = pair.exps
    rhs_u = radial_operator(pair.v.with_values(pair.v.values ** exps.kappa), exps)
    rhs_v = radial_operator(pair.u.with_values(pair.u.values ** exps.theta), exps)
    res_u = _relative_residual(rhs_u, pair.u)
    res_v = _relative_residual(rhs_v, pair.v)
    return compare(
        "el_residual",
        max(res_u, res_v),
        0.0,
        tolerance,
        inputs={"n": exps.n, "alpha": exps.alpha},
        provenance="identity",
        error_kind="absolute",
        extra={"residual_u": res_u, "residual_v": res_v},
    )


def el_amplitude_integral(d: float, exps: ExponentSet) -> float:
    """J(d) = integral over R^n of |y|^{alpha-n} (|y|^2 + d^2)^{-(n+alpha)/2} dy, by adaptive quadrature."""
    n, alpha = exps.n, exps.alpha
    value, _ = integrate.quad(
        lambda t: t ** (alpha - 1.0) * (1.0 + t * t) ** (-0.5 * (n + alpha)),
        0.0, np.inf, epsabs=0.0, epsrel=1e-12, limit=200,
    )
    return sphere_area(n - 1) * d ** (-n) * value


def derive_el_constants(d: float, exps: ExponentSet) -> Tuple[float, float]:
    """Amplitudes (c1, c2) of the closed-form pair with parameter d.

    At y = 0 the two equations read c1 d^{alpha-n} = c2^kappa J(d) and
    c2 d^{alpha-n} = c1^theta J(d); in logarithms this is linear.
    """
    _require_critical(exps)
    if not d > 0.0:
        raise ValueError(f"d must be positive, got {d!r}")
    b = math.log(el_amplitude_integral(d, exps)) - (exps.alpha - exps.n) * math.log(d)
    system = np.array([[1.0, -exps.kappa], [-exps.theta, 1.0]])
    if abs(np.linalg.det(system)) < 1e-12:
        raise ConvergenceError(f"amplitude system is singular for kappa={exps.kappa!r}")
    x1, x2 = np.linalg.solve(system, np.array([b, b]))
    return float(math.exp(x1)), float(math.exp(x2))


def solve_el_pair(d: float, exps: ExponentSet, grid: Optional[LogGrid] = None) -> ELPair:
    c1, c2 = derive_el_constants(d, exps)
    pair = el_pair(c1, c2, d, grid if grid is not None else log_grid(exps.n), exps)
    return asymptotic_coeffs(pair).attach(pair)


@dataclass(frozen=True)
class AsymptoticCoeffs:
    """Boundary limits |y|^{n-alpha} u, |x|^{n-alpha} v and the integrals they should equal."""

    a_limit: float
    a_integral: float
    b_limit: float
    b_integral: float
    stabilized: bool

    @property
    def a(self) -> float:
        return self.a_limit

    @property
    def b(self) -> float:
        return self.b_limit

    def attach(self, pair: ELPair) -> ELPair:
        return ELPair(u=pair.u, v=pair.v, exps=pair.exps, a=self.a, b=self.b)

    def reports(self, tolerance: float = EL_TOL) -> List[VerificationReport]:
        notes = "" if self.stabilized else "boundary ratio has not stabilized"
        return [
            compare("asymptotic_a", self.a_limit, self.a_integral, tolerance,
                    provenance="identity", notes=notes),
            compare("asymptotic_b", self.b_limit, self.b_integral, tolerance,
                    provenance="identity", notes=notes),
        ]


def _boundary_limit(fn: RadialFn, power: float) -> Tuple[float, float]:
    """Value of r^{power} fn at the outer edge and its relative slope over the last decade."""
    ratio = np.exp(power * fn.log_radii) * fn.values
    last = fn.log_radii >= fn.log_radii[-1] - math.log(10.0)
    tail = ratio[last]
    slope = abs(tail[-1] - tail[0]) / abs(tail[-1]) if tail[-1] != 0.0 else math.inf
    return float(ratio[-1]), float(slope)


def asymptotic_coeffs(pair: ELPair, slope_tol: float = 1e-4) -> AsymptoticCoeffs:
    """a = lim |y|^{n-alpha} u(y) = int v^kappa and b = lim |x|^{n-alpha} v(x) = int u^theta."""
    exps = pair.exps
    power = exps.n - exps.alpha
    a_limit, slope_a = _boundary_limit(pair.u, power)
    b_limit, slope_b = _boundary_limit(pair.v, power)
    stabilized = max(slope_a, slope_b) < slope_tol
    if not stabilized:
        logger.warning("asymptotic tail not stabilized (relative slope %.3e); widen the grid",
                       max(slope_a, slope_b))
    return AsymptoticCoeffs(
        a_limit=a_limit,
        a_integral=float(np.sum(pair.v.weights * pair.v.values ** exps.kappa)),
        b_limit=b_limit,
        b_integral=float(np.sum(pair.u.weights * pair.u.values ** exps.theta)),
        stabilized=stabilized,
    )


def integrability_check(pair: ELPair, tolerance: float = EL_TOL) -> VerificationReport:
    """int (1 + |y|^{alpha-n}) u^theta dy is finite: the central half of the grid already holds it."""
    exps = pair.exps
    u = pair.u
    integrand = (1.0 + u.radii ** (exps.alpha - exps.n)) * u.values ** exps.theta
    full = float(np.sum(u.weights * integrand))
    mask = _central(u)
    inner_grid = LogGrid(
        start=float(u.log_radii[mask][0]), step=u.step, size=int(mask.sum()), n=u.n
    )
    inner = float(np.sum(inner_grid.weights * integrand[mask]))
    return compare(
        "integrability", inner, full, tolerance, provenance="cross-check",
        inputs={"n": exps.n, "alpha": exps.alpha},
    )


def kelvin_identity_check(pair: ELPair, lam: float, tolerance: float = EL_TOL) -> VerificationReport:
    """u_{0,lam} = |x|^{alpha-n} * (v_{0,lam})^kappa: the system is Kelvin covariant."""
    exps = pair.exps
    kp = KelvinParams.at_origin(exps.n, lam)
    u_lam = kelvin_transform(pair.u, kp, exps)
    v_lam = kelvin_transform(pair.v, kp, exps)
    rhs = radial_operator(v_lam.with_values(v_lam.values ** exps.kappa), exps)
    residual = _relative_residual(rhs, u_lam)
    return compare(
        "kelvin_identity", residual, 0.0, tolerance, provenance="identity", error_kind="absolute",
        inputs={"lambda": lam, "n": exps.n, "alpha": exps.alpha},
    )


def moving_sphere_check(u: RadialFn, lam: float, exps: ExponentSet, tolerance: float = 1e-12) -> VerificationReport:
    """min over r > lam of (u_{0,lam} - u)/u on the grid.

    When the reflected grid is an integer shift of the original the nodes are
    matched exactly; otherwise the transform is interpolated.
    """
    w = kelvin_transform(u, KelvinParams.at_origin(exps.n, lam), exps)
    offset = (w.log_radii[0] - u.log_radii[0]) / u.step
    if abs(offset - round(offset)) < 1e-9:
        k = int(round(offset))
        if k >= 0:
            base, transformed, radii = u.values[k:], w.values[: len(w.values) - k], u.radii[k:]
        else:
            base, transformed, radii = u.values[:k], w.values[-k:], u.radii[:k]
    else:
        inside = (u.log_radii >= w.log_radii[0]) & (u.log_radii <= w.log_radii[-1])
        base, radii = u.values[inside], u.radii[inside]
        transformed = w.evaluate(radii)
    outside = radii > lam * (1.0 + 1e-12)
    if not np.any(outside):
        raise ValueError(f"no grid nodes outside the sphere of radius {lam!r}")
    diff = (transformed[outside] - base[outside]) / base[outside]
    worst = float(diff.min())
    return lower_bound(
        "moving_sphere", worst, 0.0, tolerance, error_kind="absolute",
        inputs={"lambda": lam, "n": exps.n, "alpha": exps.alpha},
        extra={"max_difference": float(diff.max())},
    )


# --- minimization on the sphere ---


def _normalized(F: ZonalFn, p: float) -> ZonalFn:
    return F.with_values(F.values / quasi_norm(F, p))


def el_map(F: ZonalFn, exps: ExponentSet) -> ZonalFn:
    """(I~[(I~ F)^{q-1}])^{1/(p-1)}, unnormalized."""
    image = sphere_operator(F, exps)
    inner = sphere_operator(image.with_values(image.values ** (exps.q - 1.0)), exps)
    return F.with_values(inner.values ** (1.0 / (exps.p - 1.0)))


@dataclass
class MinimizeResult:
    """Final iterate, the quotient after each step and whether the trace settled."""

    F: ZonalFn
    trace: List[float] = field(default_factory=list)
    converged: bool = False
    iterations: int = 0


def fixed_point_minimize(
    F0: ZonalFn,
    exps: ExponentSet,
    damping: float = 0.5,
    tol: float = 1e-10,
    maxit: int = 500,
) -> MinimizeResult:
    """Damped iteration of the Euler-Lagrange map with ||F||_p = 1 after every step.

    Stops when successive quotients differ by less than ``tol``.
    """
    if not 0.0 < damping <= 1.0:
        raise ValueError(f"damping must lie in (0, 1], got {damping!r}")
    if maxit < 1:
        raise ValueError(f"maxit must be >= 1, got {maxit!r}")
    if np.any(F0.values <= 0.0):
        raise ValueError("the starting function must be strictly positive")
    _require_critical(exps)

    F = _normalized(F0, exps.p)
    result = MinimizeResult(F=F, trace=[hls_quotient(F, exps).quotient])
    for it in range(1, maxit + 1):
        target = _normalized(el_map(F, exps), exps.p)
        F = _normalized(F.with_values((1.0 - damping) * F.values + damping * target.values), exps.p)
        result.trace.append(hls_quotient(F, exps).quotient)
        result.F, result.iterations = F, it
        if abs(result.trace[-1] - result.trace[-2]) < tol:
            result.converged = True
            break
    if not result.converged:
        logger.warning("fixed-point iteration stopped at maxit=%d without settling", maxit)
    return result


def sphere_el_residual(F: ZonalFn, exps: ExponentSet, tolerance: float = 1e-6) -> VerificationReport:
    """Residual of F^{p-1} = c I~[(I~ F)^{q-1}] after the best scalar c (weighted least squares)."""
    lhs = F.values ** (exps.p - 1.0)
    image = sphere_operator(F, exps)
    rhs = sphere_operator(image.with_values(image.values ** (exps.q - 1.0)), exps).values
    w = F.weights
    scale = float(np.sum(w * lhs * rhs) / np.sum(w * rhs * rhs))
    residual = math.sqrt(float(np.sum(w * (lhs - scale * rhs) ** 2) / np.sum(w * lhs * lhs)))
    return compare(
        "sphere_el_residual", residual, 0.0, tolerance, provenance="identity", error_kind="absolute",
        extra={"multiplier": scale},
    )


# --- concentration ---


@dataclass(frozen=True)
class ConcentrationRow:
    eps: float
    f_e1: float
    potential_e1: float
    norm_p: float
    quotient: float

    def as_row(self) -> Tuple[float, ...]:
        return (self.eps, self.f_e1, self.potential_e1, self.norm_p, self.quotient)


@dataclass(frozen=True)
class ConcentrationDemo:
    rows: List[ConcentrationRow]
    reports: List[VerificationReport]


def concentration_demo(
    eps: Sequence[float], exps: ExponentSet, grid: Optional[LogGrid] = None
) -> ConcentrationDemo:
    """The concentrating family f_eps: norm fixed, quotient at N*, f_eps(e1) -> 0, I f_eps(e1) growing."""
    _require_critical(exps)
    values = sorted((float(e) for e in eps), reverse=True)
    if not values or any(not 0.0 < e <= 1.0 for e in values):
        raise ValueError(f"eps values must lie in (0, 1], got {list(eps)!r}")
    grid = grid if grid is not None else log_grid(exps.n)
    constant = sharp_constant(exps.n, exps.alpha).value

    rows = []
    for e in values:
        f = extremal_rn(concentration_family(e, exps), grid, exps)
        image = radial_operator(f, exps)
        norm = quasi_norm(f, exps.p)
        rows.append(
            ConcentrationRow(
                eps=e,
                f_e1=float(f.evaluate(1.0)),
                potential_e1=float(image.evaluate(1.0)),
                norm_p=norm,
                quotient=quasi_norm(image, exps.q) / norm,
            )
        )

    reports = [
        compare("concentration_norm", max(r.norm_p for r in rows), min(r.norm_p for r in rows), 1e-6,
                provenance="identity")
    ]
    reports += [
        compare("concentration_quotient", r.quotient, constant, 1e-4, inputs={"eps": r.eps})
        for r in rows
    ]
    if len(rows) > 1:
        growth = min(b.potential_e1 / a.potential_e1 for a, b in zip(rows, rows[1:]))
        decay = min(a.f_e1 / b.f_e1 for a, b in zip(rows, rows[1:]))
        reports.append(lower_bound("concentration_potential_grows", growth, 1.0, 0.0,
                                   error_kind="absolute"))
        reports.append(lower_bound("concentration_value_decays", decay, 1.0, 0.0,
                                   error_kind="absolute"))
    return ConcentrationDemo(rows=rows, reports=reports)


__all__ = [
    "AsymptoticCoeffs",
    "ConcentrationDemo",
    "ConcentrationRow",
    "ConvergenceError",
    "ELPair",
    "ExtremalParamsRn",
    "ExtremalParamsSphere",
    "MinimizeResult",
    "asymptotic_coeffs",
    "concentration_demo",
    "concentration_family",
    "derive_el_constants",
    "el_amplitude_integral",
    "el_map",
    "el_pair",
    "el_residual",
    "extremal_rn",
    "extremal_sphere",
    "fixed_point_minimize",
    "integrability_check",
    "kelvin_identity_check",
    "moving_sphere_check",
    "solve_el_pair",
    "sphere_el_residual",
]

"""Exponent algebra and the sampled-function containers shared by every module."""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Callable, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.interpolate import CubicSpline

from .quadrature import LogGrid, ZonalGrid, log_grid
from .special import sphere_area

logger = logging.getLogger(__name__)

_RELATION_TOL = 1e-12
_AREA_RTOL = 1e-6
# truncated polar caps of a lifted grid
_CAP_RTOL = 1e-3


class ExponentSet(BaseModel):
    """The exponent family (n, alpha, lambda, p, t, q, theta, kappa).

    Construct through :func:`make_critical_exponents` or
    :func:`make_general_exponents`; the validator re-checks every relation.
    """

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    n: int = Field(ge=1)
    alpha: float
    lambda_: float = Field(alias="lambda")
    p: float
    t: float
    q: float
    theta: float
    kappa: float

    @model_validator(mode="after")
    def _check_relations(self) -> "ExponentSet":
        n, alpha = self.n, self.alpha
        if not alpha > n:
            raise ValueError(f"alpha must exceed n, got alpha={alpha!r} with n={n!r}")
        if abs(self.lambda_ - (n - alpha)) > _RELATION_TOL:
            raise ValueError(f"lambda must equal n - alpha, got {self.lambda_!r}")
        if not n / alpha < self.p < 1.0:
            raise ValueError(f"p must lie in (n/alpha, 1) = ({n / alpha!r}, 1), got {self.p!r}")
        if not 0.0 < self.t < 1.0:
            raise ValueError(f"t must lie in (0, 1), got {self.t!r}")
        if not (self.q < 0.0 and self.theta < 0.0 and self.kappa < 0.0):
            raise ValueError("q, theta and kappa must all be negative")
        if abs(1.0 / self.p + 1.0 / self.t + self.lambda_ / n - 2.0) > _RELATION_TOL:
            raise ValueError("1/p + 1/t + lambda/n = 2 violated")
        if abs(1.0 / self.q - (1.0 / self.p - alpha / n)) > _RELATION_TOL:
            raise ValueError("1/q = 1/p - alpha/n violated")
        if abs(self.theta - 1.0 / (self.p - 1.0)) > _RELATION_TOL * max(1.0, abs(self.theta)):
            raise ValueError("theta = 1/(p - 1) violated")
        if abs(self.kappa - (self.q - 1.0)) > _RELATION_TOL * max(1.0, abs(self.kappa)):
            raise ValueError("kappa = q - 1 violated")
        return self

    @property
    def is_critical(self) -> bool:
        """True at the conformal exponents p = t = 2n/(n + alpha)."""
        return abs(self.p - 2.0 * self.n / (self.n + self.alpha)) <= 1e-12

    @property
    def p_conjugate(self) -> float:
        """p' = p/(p - 1) < 0; equals q at the critical exponent."""
        return self.p / (self.p - 1.0)

    def require(self, n: int, alpha: float) -> None:
        """Raise unless this set belongs to (n, alpha)."""
        if self.n != n or abs(self.alpha - alpha) > 1e-12:
            raise ValueError(
                f"exponent set is for (n={self.n}, alpha={self.alpha}), not (n={n}, alpha={alpha})"
            )


def _check_dimension_pair(n: int, alpha: float) -> None:
    if int(n) != n or n < 1:
        raise ValueError(f"n must be an integer >= 1, got {n!r}")
    if not alpha > n:
        raise ValueError(f"alpha must exceed n, got alpha={alpha!r} with n={n!r}")


def make_critical_exponents(n: int, alpha: float) -> ExponentSet:
    """Exponents of the conformally invariant case."""
    _check_dimension_pair(n, alpha)
    n = int(n)
    alpha = float(alpha)
    p = 2.0 * n / (n + alpha)
    q = 2.0 * n / (n - alpha)
    exponent = (n + alpha) / (n - alpha)
    return ExponentSet(
        n=n, alpha=alpha, lambda_=n - alpha, p=p, t=p, q=q, theta=exponent, kappa=exponent
    )


def make_general_exponents(n: int, alpha: float, p: float) -> ExponentSet:
    """Exponents for an arbitrary p in (n/alpha, 1).

    Args:
        n: Dimension.
        alpha: Order of the potential, alpha > n.
        p: Integrability exponent of the input.

    Returns:
        The set with q from 1/q = 1/p - alpha/n and t from 1/p + 1/t + lambda/n = 2.
    """
    _check_dimension_pair(n, alpha)
    n = int(n)
    alpha = float(alpha)
    p = float(p)
    if not n / alpha < p < 1.0:
        raise ValueError(f"p must lie in (n/alpha, 1) = ({n / alpha!r}, 1), got {p!r}")
    lam = n - alpha
    q = 1.0 / (1.0 / p - alpha / n)
    t = 1.0 / (2.0 - 1.0 / p - lam / n)
    return ExponentSet(
        n=n, alpha=alpha, lambda_=lam, p=p, t=t, q=q, theta=1.0 / (p - 1.0), kappa=q - 1.0
    )


def _as_vector(values: object, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr


@dataclass(frozen=True)
class ZonalFn:
    """A function on the n-sphere that depends only on the polar angle.

    ``origin`` is set on functions lifted from R^n and names the log grid
    whose stereographic image the angles are.
    """

    angles: np.ndarray
    weights: np.ndarray
    values: np.ndarray
    n: int
    origin: Optional[LogGrid] = None

    def __post_init__(self) -> None:
        for name in ("angles", "weights", "values"):
            object.__setattr__(self, name, _as_vector(getattr(self, name), name))
        if not (len(self.angles) == len(self.weights) == len(self.values)):
            raise ValueError("angles, weights and values must share one length")
        if self.n < 1:
            raise ValueError(f"sphere dimension must be >= 1, got {self.n!r}")
        if np.any(self.angles <= 0.0) or np.any(self.angles >= np.pi):
            raise ValueError("polar angles must lie strictly inside (0, pi)")
        if np.any(self.weights <= 0.0):
            raise ValueError("quadrature weights must be positive")
        if np.any(self.values < 0.0):
            raise ValueError("zonal values must be nonnegative")
        area = sphere_area(self.n)
        deficit = (area - self.weights.sum()) / area
        if deficit > _CAP_RTOL or -deficit > _AREA_RTOL:
            raise ValueError(
                f"weights sum to {self.weights.sum()!r}, expected |S^{self.n}| = {area!r}"
            )

    @classmethod
    def on_grid(cls, grid: ZonalGrid, values: object) -> "ZonalFn":
        return cls(angles=grid.angles, weights=grid.weights, values=values, n=grid.n)

    @classmethod
    def from_function(cls, grid: ZonalGrid, fn: Callable[[np.ndarray], np.ndarray]) -> "ZonalFn":
        """Sample ``fn(cos theta)`` on a zonal grid."""
        return cls.on_grid(grid, fn(np.cos(grid.angles)))

    @property
    def grid(self) -> ZonalGrid:
        return ZonalGrid(angles=self.angles, weights=self.weights, n=self.n)

    @property
    def missing_area(self) -> float:
        """Part of |S^n| the weights do not cover, e.g. the polar caps cut off by a lift."""
        return sphere_area(self.n) - float(self.weights.sum())

    @property
    def heights(self) -> np.ndarray:
        """The last coordinate xi^{n+1} = cos(theta) of each node."""
        return np.cos(self.angles)

    def with_values(self, values: object) -> "ZonalFn":
        return ZonalFn(
            angles=self.angles, weights=self.weights, values=values, n=self.n, origin=self.origin
        )

    def integral(self) -> float:
        return float(np.sum(self.weights * self.values))


@dataclass(frozen=True)
class RadialFn:
    """A radial function on R^n sampled on a uniform grid in u = ln r."""

    log_radii: np.ndarray
    values: np.ndarray
    n: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "log_radii", _as_vector(self.log_radii, "log_radii"))
        object.__setattr__(self, "values", _as_vector(self.values, "values"))
        if len(self.log_radii) != len(self.values):
            raise ValueError("log_radii and values must share one length")
        if len(self.log_radii) < 3:
            raise ValueError("a radial grid needs at least three nodes")
        if self.n < 1:
            raise ValueError(f"dimension must be >= 1, got {self.n!r}")
        steps = np.diff(self.log_radii)
        if np.any(steps <= 0.0):
            raise ValueError("log_radii must be strictly increasing")
        if np.max(np.abs(steps - steps.mean())) > 1e-9 * max(1.0, float(np.abs(self.log_radii).max())):
            raise ValueError("log_radii must be uniformly spaced")
        if np.any(self.values < 0.0):
            raise ValueError("radial values must be nonnegative")

    @classmethod
    def on_grid(cls, grid: LogGrid, values: object) -> "RadialFn":
        return cls(log_radii=grid.log_radii, values=values, n=grid.n)

    @classmethod
    def from_function(cls, grid: LogGrid, fn: Callable[[np.ndarray], np.ndarray]) -> "RadialFn":
        """Sample ``fn(r)`` at the grid radii."""
        return cls.on_grid(grid, fn(grid.radii))

    @classmethod
    def on_log_grid(
        cls,
        n: int,
        fn: Callable[[np.ndarray], np.ndarray],
        half_width: Optional[float] = None,
        step: Optional[float] = None,
    ) -> "RadialFn":
        return cls.from_function(log_grid(n, half_width=half_width, step=step), fn)

    @property
    def grid(self) -> LogGrid:
        return LogGrid(start=float(self.log_radii[0]), step=self.step, size=len(self.log_radii), n=self.n)

    @property
    def step(self) -> float:
        return float((self.log_radii[-1] - self.log_radii[0]) / (len(self.log_radii) - 1))

    @property
    def radii(self) -> np.ndarray:
        return np.exp(self.log_radii)

    @property
    def weights(self) -> np.ndarray:
        """Trapezoid weights of |S^{n-1}| r^n du, the R^n volume element."""
        return self.grid.weights

    def with_values(self, values: object) -> "RadialFn":
        return RadialFn(log_radii=self.log_radii, values=values, n=self.n)

    def evaluate(self, radii: object) -> np.ndarray:
        """Interpolate at arbitrary radii.

        Cubic spline of the log-values in u when all values are positive,
        linear otherwise. Radii below the grid take the innermost value.
        """
        r = np.asarray(radii, dtype=float)
        u = np.log(np.maximum(r, np.exp(self.log_radii[0])))
        if np.any(u > self.log_radii[-1] + 1e-12):
            raise ValueError(f"radius beyond the grid edge exp({self.log_radii[-1]!r})")
        u = np.minimum(u, self.log_radii[-1])
        if np.all(self.values > 0.0):
            spline = CubicSpline(self.log_radii, np.log(self.values))
            return np.exp(spline(u))
        return np.interp(u, self.log_radii, self.values)


@dataclass(frozen=True)
class SampledFn1D:
    """A nonnegative step function on an interval partition."""

    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "breakpoints", _as_vector(self.breakpoints, "breakpoints"))
        object.__setattr__(self, "values", _as_vector(self.values, "values"))
        if len(self.breakpoints) != len(self.values) + 1:
            raise ValueError("need exactly one value per cell")
        if len(self.values) < 1:
            raise ValueError("a step function needs at least one cell")
        if np.any(np.diff(self.breakpoints) <= 0.0):
            raise ValueError("breakpoints must be strictly increasing")
        if np.any(self.values < 0.0):
            raise ValueError("step values must be nonnegative")

    @classmethod
    def uniform(cls, values: object, lo: float = 0.0, hi: float = 1.0) -> "SampledFn1D":
        vals = np.asarray(values, dtype=float)
        return cls(breakpoints=np.linspace(lo, hi, len(vals) + 1), values=vals)

    @classmethod
    def from_function(
        cls, fn: Callable[[np.ndarray], np.ndarray], lo: float, hi: float, cells: int
    ) -> "SampledFn1D":
        """Sample ``fn`` at the midpoints of ``cells`` equal cells."""
        edges = np.linspace(lo, hi, cells + 1)
        return cls(breakpoints=edges, values=fn(0.5 * (edges[:-1] + edges[1:])))

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.breakpoints)

    @property
    def weights(self) -> np.ndarray:
        return self.widths

    @property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.breakpoints[:-1] + self.breakpoints[1:])

    @property
    def measure(self) -> float:
        return float(self.breakpoints[-1] - self.breakpoints[0])

    @property
    def period(self) -> float:
        """Length of the circle when the interval is read periodically."""
        return self.measure

    @property
    def is_uniform(self) -> bool:
        w = self.widths
        return bool(np.allclose(w, w[0], rtol=1e-12, atol=0.0))

    def with_values(self, values: object) -> "SampledFn1D":
        return SampledFn1D(breakpoints=self.breakpoints, values=values)


SampledFunction = Union[ZonalFn, RadialFn, SampledFn1D]

# --- CSV I/O ---

_HEADER = re.compile(r"rhls (zonal|radial|step)(?: n=(\d+))?")
_COLUMNS = {
    "zonal": "angle,weight,value",
    "radial": "log_radius,weight,value",
    "step": "midpoint,width,value",
}


def write_csv(fn: SampledFunction, target: Union[str, Path, IO[str]]) -> None:
    """Write a container as CSV: comment line, column header, (coordinate, weight, value) rows."""
    if isinstance(fn, ZonalFn):
        kind, coords, n = "zonal", fn.angles, fn.n
    elif isinstance(fn, RadialFn):
        kind, coords, n = "radial", fn.log_radii, fn.n
    elif isinstance(fn, SampledFn1D):
        kind, coords, n = "step", fn.midpoints, None
    else:
        raise ValueError(f"cannot serialize {type(fn).__name__}")
    first = f"rhls {kind}" + (f" n={n}" if n is not None else "")
    table = np.column_stack([coords, fn.weights, fn.values])
    np.savetxt(
        target, table, delimiter=",", fmt="%.17g",
        header=f"{first}\n{_COLUMNS[kind]}", comments="# ",
    )


def read_csv(source: Union[str, Path]) -> SampledFunction:
    """Read a container written by :func:`write_csv`."""
    with open(source, encoding="utf-8") as handle:
        first = handle.readline().lstrip("#").strip()
    match = _HEADER.fullmatch(first)
    if match is None:
        raise ValueError(f"{source}: not an rhls CSV (first line {first!r})")
    kind, n = match.group(1), match.group(2)
    logger.debug("reading %s function from %s", kind, source)
    table = np.atleast_2d(np.loadtxt(source, delimiter=",", comments="#"))
    if table.shape[1] != 3:
        raise ValueError(f"{source}: expected 3 columns, got {table.shape[1]}")
    coords, weights, values = table[:, 0], table[:, 1], table[:, 2]
    if kind == "zonal":
        return ZonalFn(angles=coords, weights=weights, values=values, n=int(n))
    if kind == "radial":
        return RadialFn(log_radii=coords, values=values, n=int(n))
    left = coords - 0.5 * weights
    return SampledFn1D(breakpoints=np.append(left, coords[-1] + 0.5 * weights[-1]), values=values)

"""Stereographic projection, lifts between R^n and S^n, dilations and Kelvin inversions."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.interpolate import PchipInterpolator

from .core import ExponentSet, RadialFn, ZonalFn
from .quadrature import LogGrid
from .special import sphere_area

logger = logging.getLogger(__name__)

WeightKind = Literal["p", "q"]

_OFF_GRID_WARN = 1e-8
_CAP_REPORT = 1e-6


@dataclass(frozen=True)
class KelvinParams:
    """Center x and radius lambda of an inversion sphere."""

    center: np.ndarray
    radius: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "center", np.atleast_1d(np.asarray(self.center, dtype=float)))
        if not self.radius > 0.0:
            raise ValueError(f"Kelvin radius must be positive, got {self.radius!r}")

    @classmethod
    def at_origin(cls, n: int, radius: float) -> "KelvinParams":
        return cls(center=np.zeros(n), radius=radius)


def _points(x: object) -> np.ndarray:
    return np.atleast_1d(np.asarray(x, dtype=float))


def stereo_lift(x: object) -> np.ndarray:
    """Inverse stereographic projection R^n -> S^n, over the last axis."""
    pts = _points(x)
    s = np.sum(pts * pts, axis=-1, keepdims=True)
    return np.concatenate([2.0 * pts / (1.0 + s), (1.0 - s) / (1.0 + s)], axis=-1)


def stereo_drop(xi: object) -> np.ndarray:
    """Stereographic projection S^n minus the south pole -> R^n."""
    pts = _points(xi)
    height = pts[..., -1:]
    if np.any(height <= -1.0):
        raise ValueError("the south pole has no image in R^n")
    return pts[..., :-1] / (1.0 + height)


def chordal(x: object, y: object) -> np.ndarray:
    """|S(x) - S(y)| = [4|x-y|^2 / ((1+|x|^2)(1+|y|^2))]^{1/2}."""
    a, b = _points(x), _points(y)
    d2 = np.sum((a - b) ** 2, axis=-1)
    denom = (1.0 + np.sum(a * a, axis=-1)) * (1.0 + np.sum(b * b, axis=-1))
    out = np.minimum(np.sqrt(4.0 * d2 / denom), 2.0)
    return float(out) if np.ndim(out) == 0 else out


def _weight_exponent(exps: ExponentSet, kind: WeightKind) -> float:
    if kind == "p":
        return exps.n / exps.p
    if kind == "q":
        return exps.n / exps.q
    raise ValueError(f"Unknown weight kind: {kind!r}. Use 'p' or 'q'.")


def lift_function(f: RadialFn, exps: ExponentSet, kind: WeightKind = "p") -> ZonalFn:
    """Move a radial function on R^n to a zonal function on S^n.

    F(xi) = ((1 + |x|^2)/2)^{n/p} f(x) for ``kind="p"`` (the weight that
    carries ||.||_p); ``kind="q"`` uses n/q and matches operator outputs.
    The node at u lands at polar angle 2 arctan(e^u) with weight
    |S^{n-1}| sech^n(u) times the trapezoid weight. The caps beyond the
    grid ends are not covered; their area is ``missing_area`` of the result.
    """
    if f.n != exps.n:
        raise ValueError(f"function lives in R^{f.n}, exponents are for n={exps.n}")
    grid = f.grid
    u = grid.log_radii
    e = _weight_exponent(exps, kind)
    angles = 2.0 * np.arctan(np.exp(u))
    weights = sphere_area(exps.n - 1) * np.cosh(u) ** (-exps.n) * grid.trapezoid
    values = np.exp(e * half_conformal_log(u)) * f.values
    lifted = ZonalFn(angles=angles, weights=weights, values=values, n=exps.n, origin=grid)
    share = lifted.missing_area / sphere_area(exps.n)
    if share > _CAP_REPORT:
        logger.info("lifted grid leaves %.3e of the sphere in its polar caps", share)
    return lifted


def half_conformal_log(u: np.ndarray) -> np.ndarray:
    """ln((1 + e^{2u})/2), the log of the inverse conformal factor, without overflow."""
    u = np.asarray(u, dtype=float)
    return np.logaddexp(0.0, 2.0 * u) - math.log(2.0)


def drop_function(F: ZonalFn, exps: ExponentSet, kind: WeightKind = "p") -> RadialFn:
    """Inverse of :func:`lift_function`.

    Uses the recorded origin grid when present; otherwise the angles must be
    the image of a uniform log grid, which is recovered from the central nodes.
    """
    if F.n != exps.n:
        raise ValueError(f"function lives on S^{F.n}, exponents are for n={exps.n}")
    grid = F.origin if F.origin is not None else _recover_log_grid(F)
    e = _weight_exponent(exps, kind)
    values = np.exp(-e * half_conformal_log(grid.log_radii)) * F.values
    return RadialFn.on_grid(grid, values)


def _recover_log_grid(F: ZonalFn) -> LogGrid:
    u = np.log(np.tan(0.5 * F.angles))
    k = np.arange(len(u))
    central = np.abs(u) < 4.0
    if central.sum() < 2:
        raise ValueError("zonal grid is not the image of a logarithmic radius grid")
    step, start = np.polyfit(k[central], u[central], 1)
    grid = LogGrid(start=float(start), step=float(step), size=len(u), n=F.n)
    if np.max(np.abs(grid.log_radii[central] - u[central])) > 1e-9:
        raise ValueError("zonal grid is not the image of a uniform logarithmic radius grid")
    return grid


def dilation_loss(g: RadialFn, lam: float, exps: ExponentSet) -> float:
    """Share of ||g||_p^p that a regridded dilation by lam pushes off the grid."""
    shift = math.log(lam)
    u = g.log_radii
    mass = g.weights * g.values ** exps.p
    total = mass.sum()
    if total == 0.0:
        return 0.0
    lost = mass[(u + shift < u[0] - 1e-12) | (u + shift > u[-1] + 1e-12)].sum()
    return float(lost / total)


def dilate(g: RadialFn, lam: float, exps: ExponentSet, regrid: bool = False) -> RadialFn:
    """g^lam(x) = lam^{-n/p} g(x / lam).

    By default the grid itself moves by ln(lam), which is exact. With
    ``regrid=True`` the result is resampled on g's own grid by monotone
    cubic interpolation; mass leaving the grid is logged.
    """
    if not lam > 0.0:
        raise ValueError(f"dilation factor must be positive, got {lam!r}")
    if g.n != exps.n:
        raise ValueError(f"function lives in R^{g.n}, exponents are for n={exps.n}")
    scale = lam ** (-exps.n / exps.p)
    shift = math.log(lam)
    if not regrid:
        return RadialFn.on_grid(g.grid.shifted(shift), scale * g.values)

    loss = dilation_loss(g, lam, exps)
    if loss > _OFF_GRID_WARN:
        logger.warning("dilation by %g pushes %.3e of the p-mass off the grid", lam, loss)
    offset = shift / g.step
    if abs(offset - round(offset)) < 1e-9:
        k = int(round(offset))
        values = np.zeros_like(g.values)
        if 0 <= k < len(values):
            values[k:] = g.values[: len(values) - k]
        elif -len(values) < k < 0:
            values[:k] = g.values[-k:]
    else:
        source = g.log_radii - shift
        inside = (source >= g.log_radii[0]) & (source <= g.log_radii[-1])
        values = np.zeros_like(g.values)
        values[inside] = np.maximum(PchipInterpolator(g.log_radii, g.values)(source[inside]), 0.0)
    return g.with_values(scale * values)


def kelvin_point(xi: object, kp: KelvinParams) -> np.ndarray:
    """xi^{x,lam} = x + lam^2 (xi - x) / |xi - x|^2."""
    pts = _points(xi)
    diff = pts - kp.center
    d2 = np.sum(diff * diff, axis=-1, keepdims=True)
    if np.any(d2 == 0.0):
        raise ValueError("the inversion center has no Kelvin image")
    return kp.center + kp.radius ** 2 * diff / d2


def kelvin_transform(w: RadialFn, kp: KelvinParams, exps: ExponentSet) -> RadialFn:
    """w_{0,lam}(xi) = (lam/|xi|)^{n-alpha} w(xi^{0,lam}) for radial w.

    In u = ln r the inversion is the reflection u -> 2 ln(lam) - u; the
    result lives on the reflected grid, so no interpolation is involved.
    """
    if not np.allclose(kp.center, 0.0):
        raise ValueError("radial Kelvin transforms need the center at the origin")
    if w.n != exps.n:
        raise ValueError(f"function lives in R^{w.n}, exponents are for n={exps.n}")
    mirror = 2.0 * math.log(kp.radius)
    grid = w.grid.reflected(mirror)
    u = grid.log_radii
    factor = np.exp(exps.lambda_ * (math.log(kp.radius) - u))
    return RadialFn.on_grid(grid, factor * w.values[::-1])


def kelvin_kernel(
    x: object, lam: float, xi: object, eta: object, n: int, alpha: float
) -> np.ndarray:
    """Comparison kernel of the moving-sphere identities.

    K = (lam/|xi-x|)^{n-alpha} |xi^{x,lam} - eta|^{alpha-n} - |xi-eta|^{alpha-n},
    positive whenever xi and eta both lie outside the ball B_lam(x).
    """
    kp = KelvinParams(center=np.asarray(x, dtype=float).reshape(-1), radius=lam)
    a, b = _points(xi), _points(eta)
    if a.shape[-1] != n or b.shape[-1] != n:
        raise ValueError(f"points must have {n} coordinates")
    s = alpha - n
    dist_center = np.linalg.norm(a - kp.center, axis=-1)
    image = kelvin_point(a, kp)
    return (lam / dist_center) ** (-s) * np.linalg.norm(image - b, axis=-1) ** s - np.linalg.norm(
        a - b, axis=-1
    ) ** s

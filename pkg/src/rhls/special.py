"""Gamma-function constants, sphere areas and the kernels of the radial reduction."""

from __future__ import annotations

import functools
import math
from typing import TYPE_CHECKING, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.special import gammaln, roots_jacobi, roots_legendre

if TYPE_CHECKING:
    from .core import ExponentSet

ArrayLike = Union[float, np.ndarray]

ZN_NODES = 128


class SharpConstant(BaseModel):
    """Best constant N*(n, alpha) of the reversed inequality."""

    model_config = ConfigDict(frozen=True)

    n: int
    alpha: float
    value: float = Field(gt=0.0)


def _require_alpha_above_n(n: int, alpha: float) -> None:
    if int(n) != n or n < 1:
        raise ValueError(f"n must be an integer >= 1, got {n!r}")
    if not alpha > n:
        raise ValueError(f"alpha must exceed n, got alpha={alpha!r} with n={n!r}")


def log_gamma(x: ArrayLike) -> ArrayLike:
    """ln Gamma(x) for x > 0."""
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0.0)):
        raise ValueError(f"log_gamma needs x > 0, got {x!r}")
    out = gammaln(arr)
    return float(out) if out.ndim == 0 else out


def sphere_area(n: int) -> float:
    """Surface measure |S^n| = 2 pi^{(n+1)/2} / Gamma((n+1)/2); |S^0| = 2."""
    if int(n) != n or n < 0:
        raise ValueError(f"sphere dimension must be an integer >= 0, got {n!r}")
    return float(2.0 * math.exp(0.5 * (n + 1) * math.log(math.pi) - gammaln(0.5 * (n + 1))))


def sphere_area_duplication(n: int) -> float:
    """|S^n| via the duplication form 2^n pi^{n/2} Gamma(n/2) / Gamma(n), n >= 1."""
    if int(n) != n or n < 1:
        raise ValueError(f"duplication form needs n >= 1, got {n!r}")
    return float(
        math.exp(n * math.log(2.0) + 0.5 * n * math.log(math.pi) + gammaln(0.5 * n) - gammaln(n))
    )


def ball_volume(n: int) -> float:
    """Volume of the unit ball in R^n, pi^{n/2} / Gamma(n/2 + 1)."""
    if int(n) != n or n < 0:
        raise ValueError(f"dimension must be an integer >= 0, got {n!r}")
    return float(math.exp(0.5 * n * math.log(math.pi) - gammaln(0.5 * n + 1.0)))


def sharp_constant(n: int, alpha: float) -> SharpConstant:
    """N*(n, alpha), evaluated in log space.

    N* = pi^{(n-alpha)/2} Gamma(alpha/2) / Gamma((n+alpha)/2)
         * (Gamma(n/2) / Gamma(n))^{-alpha/n}
    """
    _require_alpha_above_n(n, alpha)
    log_value = (
        0.5 * (n - alpha) * math.log(math.pi)
        + gammaln(0.5 * alpha)
        - gammaln(0.5 * (n + alpha))
        - (alpha / n) * (gammaln(0.5 * n) - gammaln(float(n)))
    )
    return SharpConstant(n=int(n), alpha=float(alpha), value=math.exp(log_value))


def kernel_integral(n: int, alpha: float) -> float:
    """Integral of |xi - eta|^{alpha-n} over S^n in eta, for any fixed xi.

    Equals 2^{alpha-1} |S^{n-1}| Gamma(n/2) Gamma(alpha/2) / Gamma((n+alpha)/2).
    """
    if int(n) != n or n < 1:
        raise ValueError(f"n must be an integer >= 1, got {n!r}")
    if not alpha > 0.0:
        raise ValueError(f"alpha must be positive, got {alpha!r}")
    log_value = (
        (alpha - 1.0) * math.log(2.0)
        + math.log(sphere_area(n - 1))
        + gammaln(0.5 * n)
        + gammaln(0.5 * alpha)
        - gammaln(0.5 * (n + alpha))
    )
    return math.exp(log_value)


def kernel_integral_quadrature(n: int, alpha: float, nodes: int = 256) -> float:
    """Independent quadrature of the kernel integral from the north pole.

    With t = cos(angle to the pole), |xi - eta|^{alpha-n} = (2 - 2t)^{(alpha-n)/2}
    and the zonal measure is |S^{n-1}| (1 - t^2)^{(n-2)/2} dt; both powers are
    absorbed into one Gauss-Jacobi weight, which leaves a constant integrand.
    """
    if not alpha > 0.0:
        raise ValueError(f"alpha must be positive, got {alpha!r}")
    a = 0.5 * (n - 2) + 0.5 * (alpha - n)
    b = 0.5 * (n - 2)
    _, weights = roots_jacobi(nodes, a, b)
    return float(sphere_area(n - 1) * 2.0 ** (0.5 * (alpha - n)) * weights.sum())


def extremal_image_amplitude(n: int, alpha: float) -> float:
    """mu with I_alpha (1+|x|^2)^{-(n+alpha)/2} = mu (1+|x|^2)^{(alpha-n)/2}."""
    return kernel_integral(n, alpha) / 2.0 ** alpha


@functools.lru_cache(maxsize=None)
def _theta_rule(nodes: int):
    x, w = roots_legendre(nodes)
    theta = 0.5 * np.pi * (x + 1.0)
    return theta, 0.5 * np.pi * w


def zn_kernel(n: int, alpha: float, u: ArrayLike) -> ArrayLike:
    """Angular kernel Z_n(u) of the radial reduction.

    n = 1: (cosh u + 1)^s + (cosh u - 1)^s with s = (alpha - n)/2.
    n >= 2: |S^{n-2}| * integral_0^pi (cosh u - cos t)^s sin^{n-2} t dt,
    by Gauss-Legendre on t with a fixed node count.
    """
    _require_alpha_above_n(n, alpha)
    s = 0.5 * (alpha - n)
    uu = np.asarray(u, dtype=float)
    ch = np.cosh(uu)
    if n == 1:
        out = (ch + 1.0) ** s + np.maximum(ch - 1.0, 0.0) ** s
    else:
        theta, w = _theta_rule(ZN_NODES)
        base = np.maximum(ch[..., None] - np.cos(theta), 0.0) ** s
        out = sphere_area(n - 2) * np.sum(base * np.sin(theta) ** (n - 2) * w, axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def ln_kernel(n: int, alpha: float, u: ArrayLike, exps: "ExponentSet") -> ArrayLike:
    """L_n(u) = (1/2)^{(n-alpha)/2} e^{u(n/q - (n-alpha)/2)} Z_n(u)."""
    exps.require(n, alpha)
    uu = np.asarray(u, dtype=float)
    rate = n / exps.q - 0.5 * (n - alpha)
    out = 0.5 ** (0.5 * (n - alpha)) * np.exp(rate * uu) * zn_kernel(n, alpha, uu)
    return float(out) if np.ndim(out) == 0 else out

"""Quadrature rules and the two grids every sampled function lives on."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.polynomial import legendre
from scipy.special import roots_jacobi

from .config import get_settings
from .special import sphere_area


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and positive weights on a domain.

    ``degree`` is the polynomial degree integrated exactly against the
    rule's weight function.
    """

    nodes: np.ndarray
    weights: np.ndarray
    domain: str
    degree: int

    def __post_init__(self) -> None:
        if len(self.nodes) != len(self.weights):
            raise ValueError("nodes and weights must share one length")
        if np.any(self.weights <= 0.0):
            raise ValueError("quadrature weights must be positive")

    def integrate(self, fn) -> float:
        return float(np.sum(self.weights * fn(self.nodes)))

    def mapped(self, lo: float, hi: float) -> "QuadratureRule":
        """Affine image of a rule on [-1, 1] onto [lo, hi]."""
        half = 0.5 * (hi - lo)
        return QuadratureRule(
            nodes=lo + half * (self.nodes + 1.0),
            weights=half * self.weights,
            domain=f"[{lo!r}, {hi!r}]",
            degree=self.degree,
        )


def gauss_legendre(m: int) -> QuadratureRule:
    """m-point Gauss-Legendre rule on [-1, 1], exact to degree 2m - 1."""
    if m < 1:
        raise ValueError(f"node count must be >= 1, got {m!r}")
    nodes, weights = legendre.leggauss(m)
    return QuadratureRule(nodes=nodes, weights=weights, domain="[-1, 1]", degree=2 * m - 1)


def gauss_jacobi(m: int, a: float, b: float) -> QuadratureRule:
    """m-point rule for the weight (1 - x)^a (1 + x)^b on [-1, 1], a, b > -1."""
    if m < 1:
        raise ValueError(f"node count must be >= 1, got {m!r}")
    if not (a > -1.0 and b > -1.0):
        raise ValueError(f"Jacobi exponents must exceed -1, got a={a!r}, b={b!r}")
    nodes, weights = roots_jacobi(m, a, b)
    return QuadratureRule(
        nodes=nodes, weights=weights, domain=f"[-1, 1] (1-x)^{a!r} (1+x)^{b!r}", degree=2 * m - 1
    )


@dataclass(frozen=True)
class ZonalGrid:
    """Polar angles and weights of a quadrature rule on S^n for zonal integrands."""

    angles: np.ndarray
    weights: np.ndarray
    n: int

    @property
    def size(self) -> int:
        return len(self.angles)


def zonal_grid(n: int, m: Optional[int] = None) -> ZonalGrid:
    """Zonal grid on S^n.

    In t = cos(theta) the zonal measure is |S^{n-1}| (1 - t^2)^{(n-2)/2} dt,
    so the rule is Gauss-Jacobi with a = b = (n-2)/2: Chebyshev for n = 1,
    Legendre for n = 2. Weights sum to |S^n|.
    """
    if int(n) != n or n < 1:
        raise ValueError(f"sphere dimension must be an integer >= 1, got {n!r}")
    m = m if m is not None else get_settings().sphere_nodes
    if n == 2:
        rule = gauss_legendre(m)
    else:
        rule = gauss_jacobi(m, 0.5 * (n - 2), 0.5 * (n - 2))
    order = np.argsort(-rule.nodes)
    angles = np.arccos(rule.nodes[order])
    return ZonalGrid(angles=angles, weights=sphere_area(n - 1) * rule.weights[order], n=int(n))


@dataclass(frozen=True)
class LogGrid:
    """Uniform grid u_k = start + k * step in u = ln r, for radial functions on R^n."""

    start: float
    step: float
    size: int
    n: int

    def __post_init__(self) -> None:
        if self.size < 3:
            raise ValueError(f"a log grid needs at least three nodes, got {self.size!r}")
        if not self.step > 0.0:
            raise ValueError(f"grid step must be positive, got {self.step!r}")

    @property
    def log_radii(self) -> np.ndarray:
        return self.start + self.step * np.arange(self.size)

    @property
    def radii(self) -> np.ndarray:
        return np.exp(self.log_radii)

    @property
    def end(self) -> float:
        return self.start + self.step * (self.size - 1)

    @property
    def center(self) -> float:
        return 0.5 * (self.start + self.end)

    @property
    def half_width(self) -> float:
        return 0.5 * (self.end - self.start)

    @property
    def trapezoid(self) -> np.ndarray:
        """Trapezoid weights in u."""
        w = np.full(self.size, self.step)
        w[0] = w[-1] = 0.5 * self.step
        return w

    @property
    def weights(self) -> np.ndarray:
        """Weights of the R^n volume element |S^{n-1}| r^n du."""
        return sphere_area(self.n - 1) * np.exp(self.n * self.log_radii) * self.trapezoid

    def shifted(self, delta: float) -> "LogGrid":
        return LogGrid(start=self.start + delta, step=self.step, size=self.size, n=self.n)

    def reflected(self, mirror: float) -> "LogGrid":
        """Grid of the points mirror - u_k, in increasing order."""
        return LogGrid(start=mirror - self.end, step=self.step, size=self.size, n=self.n)


def log_grid(n: int, half_width: Optional[float] = None, step: Optional[float] = None) -> LogGrid:
    """Symmetric grid on [-U, U]; U and h default to the configured values."""
    settings = get_settings()
    half_width = half_width if half_width is not None else settings.log_half_width
    step = step if step is not None else settings.log_step
    cells = int(round(2.0 * half_width / step))
    if cells < 2:
        raise ValueError(f"half width {half_width!r} too small for step {step!r}")
    return LogGrid(start=-0.5 * cells * step, step=step, size=cells + 1, n=int(n))

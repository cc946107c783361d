"""The potential operators on the sphere and on R^n, the split operators and a Monte Carlo cross-check."""

from __future__ import annotations

import functools
import logging
import math
from dataclasses import dataclass
from typing import Callable, Literal, Optional, Tuple

import numpy as np
from scipy.linalg import toeplitz
from scipy.special import hyp2f1

from .config import get_settings, ordered_map
from .core import ExponentSet, RadialFn, ZonalFn, make_critical_exponents
from .quadrature import LogGrid, ZonalGrid, gauss_jacobi, gauss_legendre
from .special import kernel_integral, ln_kernel, log_gamma, sphere_area

logger = logging.getLogger(__name__)

Part = Literal["near", "far"]

_TAIL_WARN = 1e-8
_BLOCK_ENTRIES = 4_000_000
_SPLIT_NODES = 64
_EXP_LIMIT = 700.0


# --- sphere ---


def _azimuth_rule(n: int, m: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes x = cos(phi) and normalized weights of the average over S^{n-1}."""
    if n == 1:
        return np.array([1.0, -1.0]), np.array([0.5, 0.5])
    rule = gauss_jacobi(m, 0.5 * (n - 3), 0.5 * (n - 3))
    return rule.nodes, rule.weights / rule.weights.sum()


def _kernel_rows(
    angles: np.ndarray, rows: range, s: float, x: np.ndarray, c: np.ndarray
) -> np.ndarray:
    th = angles[rows.start : rows.stop, None]
    th2 = angles[None, :]
    # |xi - eta|^2 = 4 sin^2((th - th2)/2) + 2 sin(th) sin(th2) (1 - cos(phi))
    gap = 4.0 * np.sin(0.5 * (th - th2)) ** 2
    cross = 2.0 * np.sin(th) * np.sin(th2)
    base = gap[..., None] + cross[..., None] * (1.0 - x)
    return np.sum(np.maximum(base, 0.0) ** s * c, axis=-1)


@dataclass(frozen=True)
class ZonalKernelMatrix:
    """Discretization of the sphere operator on one zonal grid.

    ``kernel`` holds the azimuthally averaged |xi - eta|^{alpha-n} between
    node pairs (symmetric). ``matrix`` is kernel times column weights with the
    diagonal replaced so every row sums to the kernel integral exactly.
    ``raw_row_sums`` keeps the uncorrected sums as a quadrature diagnostic.
    """

    n: int
    alpha: float
    angles: np.ndarray
    weights: np.ndarray
    kernel: np.ndarray
    matrix: np.ndarray
    raw_row_sums: np.ndarray
    kernel_integral: float

    @property
    def size(self) -> int:
        return len(self.angles)

    @property
    def defect(self) -> float:
        """Largest relative deviation of the raw row sums from the kernel integral."""
        return float(np.max(np.abs(self.raw_row_sums - self.kernel_integral)) / self.kernel_integral)

    def row_sums(self) -> np.ndarray:
        return self.matrix.sum(axis=1)

    def apply(self, values: np.ndarray, max_workers: Optional[int] = None) -> np.ndarray:
        """Matrix-vector product, row blocks in parallel, fixed order inside each row."""
        v = np.asarray(values, dtype=float)
        if v.shape != (self.size,):
            raise ValueError(f"expected {self.size} values, got shape {v.shape}")
        blocks = _row_blocks(self.size, self.size)
        parts = ordered_map(lambda rows: np.sum(self.matrix[rows.start : rows.stop] * v, axis=1),
                            blocks, max_workers)
        return np.concatenate(parts)

    @classmethod
    def assemble(
        cls, grid: ZonalGrid, alpha: float, azimuth_nodes: Optional[int] = None
    ) -> "ZonalKernelMatrix":
        m = azimuth_nodes if azimuth_nodes is not None else get_settings().azimuth_nodes
        return _assemble_cached(
            grid.n, float(alpha), grid.angles.tobytes(), grid.weights.tobytes(), int(m)
        )


def _row_blocks(rows: int, width: int) -> list:
    step = max(1, _BLOCK_ENTRIES // max(1, width))
    return [range(lo, min(lo + step, rows)) for lo in range(0, rows, step)]


@functools.lru_cache(maxsize=4)
def _assemble_cached(
    n: int, alpha: float, angles_raw: bytes, weights_raw: bytes, m: int
) -> ZonalKernelMatrix:
    angles = np.frombuffer(angles_raw, dtype=float)
    weights = np.frombuffer(weights_raw, dtype=float)
    if not alpha > n:
        raise ValueError(f"alpha must exceed n, got alpha={alpha!r} with n={n!r}")
    s = 0.5 * (alpha - n)
    x, c = _azimuth_rule(n, m)
    size = len(angles)
    blocks = _row_blocks(size, size * len(x))
    logger.debug("assembling %dx%d zonal kernel (n=%d, alpha=%g)", size, size, n, alpha)
    parts = ordered_map(lambda rows: _kernel_rows(angles, rows, s, x, c), blocks)
    averaged = np.concatenate(parts, axis=0)
    kernel = 0.5 * (averaged + averaged.T)

    total = kernel_integral(n, alpha)
    matrix = kernel * weights[None, :]
    raw = matrix.sum(axis=1)
    np.fill_diagonal(matrix, 0.0)
    diagonal = total - matrix.sum(axis=1)
    if np.any(diagonal < 0.0):
        logger.warning(
            "corrected kernel diagonal negative at %d nodes (min %.3e); grid too coarse",
            int(np.sum(diagonal < 0.0)), float(diagonal.min()),
        )
    matrix[np.diag_indices(size)] = diagonal
    for arr in (kernel, matrix, raw):
        arr.setflags(write=False)
    return ZonalKernelMatrix(
        n=n, alpha=alpha, angles=angles, weights=weights, kernel=kernel, matrix=matrix,
        raw_row_sums=raw, kernel_integral=total,
    )


def sphere_operator(F: ZonalFn, exps: ExponentSet) -> ZonalFn:
    """(I~_alpha F)(xi) = integral over S^n of F(eta) |xi - eta|^{alpha-n} d eta."""
    if F.n != exps.n:
        raise ValueError(f"function lives on S^{F.n}, exponents are for n={exps.n}")
    km = ZonalKernelMatrix.assemble(F.grid, exps.alpha)
    return F.with_values(np.maximum(km.apply(F.values), 0.0))


def azimuthal_average(n: int, alpha: float, theta: float, theta2: float) -> float:
    """Closed form of the kernel averaged over the azimuth between two polar angles.

    With t = cos, s = sin and nu = (alpha - n)/2 the average of
    (2 - 2tt' - 2ss' cos phi)^nu over S^{n-1} is
    (2 - 2tt')^nu 2F1(-nu/2, (1 - nu)/2; n/2; (ss'/(1 - tt'))^2).
    """
    nu = 0.5 * (alpha - n)
    t, t2 = math.cos(theta), math.cos(theta2)
    s, s2 = math.sin(theta), math.sin(theta2)
    base = 2.0 - 2.0 * t * t2
    if base <= 0.0:
        return 0.0
    z = (s * s2 / (1.0 - t * t2)) ** 2
    return float(base ** nu * hyp2f1(-0.5 * nu, 0.5 * (1.0 - nu), 0.5 * n, min(z, 1.0)))


# --- R^n ---


@functools.lru_cache(maxsize=2)
def _radial_matrix(n: int, alpha: float, start: float, step: float, size: int) -> np.ndarray:
    """T[j, k] with (I f)(r_j) ~ sum_k T[j, k] f(r_k).

    T[j, k] = r_j^{-n/q} L_n(u_j - u_k) r_k^{n/q + alpha} trapezoid_k at the critical
    exponents, where n/q = -(alpha - n)/2 and L_n is even.
    """
    grid = LogGrid(start=start, step=step, size=size, n=n)
    u = grid.log_radii
    s = 0.5 * (alpha - n)
    if s * 2.0 * float(np.max(np.abs(u))) + n * float(np.max(u)) > _EXP_LIMIT:
        raise ValueError(
            f"log grid of half width {grid.half_width!r} too wide for alpha={alpha!r}; "
            "narrow it to keep the kernel finite"
        )
    exps = make_critical_exponents(n, alpha)
    rate = n / exps.q
    matrix = toeplitz(ln_kernel(n, alpha, step * np.arange(size), exps)) * np.exp(-rate * u)[:, None]
    matrix *= (np.exp((rate + alpha) * u) * grid.trapezoid)[None, :]
    matrix.setflags(write=False)
    return matrix


def _matrix_for(f: RadialFn, exps: ExponentSet) -> np.ndarray:
    grid = f.grid
    return _radial_matrix(exps.n, exps.alpha, grid.start, grid.step, grid.size)


def _row_sums(matrix: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    """sum_k matrix[j, k] * vectors[j, k] (or vectors[k]) by row blocks."""
    blocks = _row_blocks(matrix.shape[0], matrix.shape[1])
    if vectors.ndim == 1:
        parts = ordered_map(lambda rows: np.sum(matrix[rows.start : rows.stop] * vectors, axis=1), blocks)
    else:
        parts = ordered_map(
            lambda rows: np.sum(matrix[rows.start : rows.stop] * vectors[rows.start : rows.stop], axis=1),
            blocks,
        )
    return np.concatenate(parts)


def _radial_apply(f: RadialFn, exps: ExponentSet) -> Tuple[np.ndarray, np.ndarray]:
    """Operator values and the per-node reference truncation estimate.

    Each row subtracts the extremal profile dilated to d = r_j and scaled to
    match f at r_j, then adds that profile's image back in closed form:
    (|x|^2 + d^2)^{-(n+alpha)/2} maps to mu d^{-n} (1 + |x|^2/d^2)^{(alpha-n)/2}.
    """
    n, alpha = exps.n, exps.alpha
    matrix = _matrix_for(f, exps)
    u = f.log_radii

    # log of (r_k^2 + r_j^2) for the reference of row j
    log_pair = np.logaddexp(2.0 * u[None, :], 2.0 * u[:, None])
    reference = np.exp(-0.5 * (n + alpha) * (log_pair - (math.log(2.0) + 2.0 * u)[:, None]))
    # reference[j, j] == 1; its exact image at r_j is mu (2 r_j)^alpha = K(n, alpha) r_j^alpha
    image = kernel_integral(n, alpha) * np.exp(alpha * u)
    summed_reference = _row_sums(matrix, reference)
    direct = _row_sums(matrix, f.values)
    values = direct - f.values * summed_reference + f.values * image
    return values, np.abs(f.values) * _reference_tail(f, exps)


def _reference_tail(f: RadialFn, exps: ExponentSet) -> np.ndarray:
    """Bound on the image of each row's reference profile from radii outside the grid."""
    n, alpha = exps.n, exps.alpha
    r = f.radii
    lo, hi = r[0], r[-1]
    shell = sphere_area(n - 1) / n
    above = shell * (2.0 * r * r) ** (0.5 * (n + alpha)) * (1.0 + r / hi) ** (alpha - n) * hi ** (-n)
    below = shell * 2.0 ** (0.5 * (n + alpha)) * (r + lo) ** (alpha - n) * lo ** n
    return above + below


def radial_operator(f: RadialFn, exps: ExponentSet) -> RadialFn:
    """(I_alpha f)(x) = integral over R^n of f(y) |x - y|^{alpha-n} dy for radial f.

    In u = ln r the operator is a convolution with the L_n kernel. The
    coincidence kink of the kernel is removed by per-row subtraction of a
    scale-matched extremal profile whose image is known exactly.
    """
    if f.n != exps.n:
        raise ValueError(f"function lives in R^{f.n}, exponents are for n={exps.n}")
    if not np.any(f.values > 0.0):
        logger.warning("radial operator applied to the zero function; output is zero")
        return f.with_values(np.zeros_like(f.values))
    values, truncation = _radial_apply(f, exps)
    values = np.maximum(values, 0.0)
    _warn_truncation(f, values, truncation)
    return f.with_values(values)


def _central(f: RadialFn) -> np.ndarray:
    grid = f.grid
    return np.abs(f.log_radii - grid.center) <= 0.5 * grid.half_width


def _warn_truncation(f: RadialFn, values: np.ndarray, truncation: np.ndarray) -> None:
    central = _central(f) & (values > 0.0)
    if not np.any(central):
        return
    worst = float(np.max(truncation[central] / values[central]))
    if worst > _TAIL_WARN:
        logger.warning("radial truncation estimate %.3e exceeds %.0e of the result", worst, _TAIL_WARN)


def radial_tail_estimate(f: RadialFn, exps: ExponentSet) -> float:
    """Largest relative truncation estimate over the central half of the grid."""
    if not np.any(f.values > 0.0):
        return 0.0
    values, truncation = _radial_apply(f, exps)
    central = _central(f) & (values > 0.0)
    if not np.any(central):
        return math.inf
    return float(np.max(truncation[central] / values[central]))


def _far_matrix(f: RadialFn, rho: float, exps: ExponentSet) -> np.ndarray:
    """Raw trapezoid weights of the part of the kernel with |x - y| > rho."""
    n, alpha = exps.n, exps.alpha
    s = 0.5 * (alpha - n)
    u = f.log_radii
    grid = f.grid
    w = u[:, None] - u[None, :]
    outer = 2.0 ** s * np.exp(s * (u[:, None] + u[None, :]))
    outer *= (np.exp(n * u) * grid.trapezoid)[None, :]
    # |x - y|^2 = 2 r s (cosh w - cos gamma): far iff cos gamma < cosh w - rho^2 / (2 r s)
    threshold = np.cosh(w) - rho * rho / (2.0 * np.exp(u[:, None] + u[None, :]))

    if n == 1:
        same = np.where(1.0 < threshold, np.maximum(np.cosh(w) - 1.0, 0.0) ** s, 0.0)
        opposite = np.where(-1.0 < threshold, (np.cosh(w) + 1.0) ** s, 0.0)
        return outer * (same + opposite)

    # pairs with every direction far keep the full radial kernel
    everything = threshold >= 1.0
    far = np.where(everything, _matrix_for(f, exps), 0.0)
    angular = np.zeros_like(w)
    band = (threshold > -1.0) & ~everything
    if np.any(band):
        rule = gauss_legendre(_SPLIT_NODES)
        idx = np.flatnonzero(band)
        gamma0 = np.arccos(threshold.ravel()[idx])
        cw = np.cosh(w.ravel()[idx])
        chunk = max(1, _BLOCK_ENTRIES // _SPLIT_NODES)
        out = np.empty(len(idx))
        for lo in range(0, len(idx), chunk):
            g0 = gamma0[lo : lo + chunk, None]
            half = 0.5 * (math.pi - g0)
            gamma = g0 + half * (rule.nodes + 1.0)
            integrand = np.maximum(cw[lo : lo + chunk, None] - np.cos(gamma), 0.0) ** s
            integrand *= np.sin(gamma) ** (n - 2)
            out[lo : lo + chunk] = np.sum(integrand * rule.weights, axis=1) * half[:, 0]
        angular.ravel()[idx] = sphere_area(n - 2) * out
    return far + outer * angular


def split_operator(f: RadialFn, rho: float, part: Part, exps: ExponentSet) -> RadialFn:
    """Near part (|x - y| <= rho) or far part (|x - y| > rho) of the radial operator.

    The far part is summed directly; the near part is the remainder of the
    full operator, so near + far reproduces :func:`radial_operator`.
    """
    if not rho > 0.0:
        raise ValueError(f"split radius must be positive, got {rho!r}")
    if part not in ("near", "far"):
        raise ValueError(f"Unknown part: {part!r}. Use 'near' or 'far'.")
    full = radial_operator(f, exps).values
    far = _row_sums(_far_matrix(f, rho, exps), f.values)
    near = np.clip(full - far, 0.0, full)
    chosen = near if part == "near" else full - near
    return f.with_values(chosen)


# --- Monte Carlo ---


@dataclass(frozen=True)
class MonteCarloEstimate:
    """Pointwise estimates with their standard errors."""

    values: np.ndarray
    stderr: np.ndarray
    samples: int


def mc_operator(
    f: Callable[[np.ndarray], np.ndarray],
    alpha: float,
    n: int,
    points: object,
    samples: int,
    seed: int,
) -> MonteCarloEstimate:
    """Importance-sampled (I_alpha f)(x) at each point.

    Samples y = z / sqrt(chi^2_n) have density proportional to
    (1 + |y|^2)^{-n}, with normalizer pi^{n/2} Gamma(n/2) / Gamma(n). The same
    samples serve every evaluation point.

    Args:
        f: Vectorized function of an (N, n) array of points.
        alpha: Order of the potential.
        n: Dimension.
        points: Evaluation points, shape (P, n) or (n,).
        samples: Number of draws.
        seed: Seed of ``numpy.random.default_rng``.
    """
    if not alpha > n:
        raise ValueError(f"alpha must exceed n, got alpha={alpha!r} with n={n!r}")
    if samples < 2:
        raise ValueError(f"need at least two samples, got {samples!r}")
    x = np.atleast_2d(np.asarray(points, dtype=float))
    if x.shape[1] != n:
        raise ValueError(f"points must have {n} coordinates, got shape {x.shape}")

    rng = np.random.default_rng(seed)
    z = rng.standard_normal((samples, n))
    chi2 = rng.chisquare(n, size=samples)
    y = z / np.sqrt(chi2)[:, None]
    log_norm = 0.5 * n * math.log(math.pi) + log_gamma(0.5 * n) - log_gamma(float(n))
    log_density = -n * np.log1p(np.sum(y * y, axis=1)) - log_norm
    fy = np.asarray(f(y), dtype=float)
    if not np.any(fy != 0.0):
        zeros = np.zeros(len(x))
        return MonteCarloEstimate(values=zeros, stderr=zeros.copy(), samples=samples)
    ratio = fy * np.exp(-log_density)

    values = np.empty(len(x))
    stderr = np.empty(len(x))
    for i, point in enumerate(x):
        dist = np.linalg.norm(y - point, axis=1)
        terms = dist ** (alpha - n) * ratio
        values[i] = terms.mean()
        stderr[i] = terms.std(ddof=1) / math.sqrt(samples)
    return MonteCarloEstimate(values=values, stderr=stderr, samples=samples)

"""Small dense linear algebra, 1D quadrature, normal CDF and seeded sampling."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import linalg, special

from .errors import DomainError, NotPositiveDefinite, UnsupportedDimension

SYMMETRY_RTOL = 1e-12
DENSITY_CUTOFF = 1e-14
SIMPSON_TOL = 1e-10

KINDS = ("gaussian", "empirical", "density")


def as_matrix(m) -> np.ndarray:
    a = np.atleast_2d(np.asarray(m, dtype=float))
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {a.shape}")
    return a


def is_symmetric(m: np.ndarray, rtol: float = SYMMETRY_RTOL) -> bool:
    scale = max(np.max(np.abs(m)), np.finfo(float).tiny)
    return bool(np.max(np.abs(m - m.T)) <= rtol * scale)


def cholesky(m) -> np.ndarray:
    """Lower-triangular L with L @ L.T == m.

    Raises NotPositiveDefinite for non-symmetric input, non-finite entries or
    any pivot <= 0.
    """
    a = as_matrix(m)
    if not np.all(np.isfinite(a)):
        raise NotPositiveDefinite("matrix has non-finite entries")
    if not is_symmetric(a):
        raise NotPositiveDefinite("matrix is not symmetric")
    try:
        L = np.linalg.cholesky(0.5 * (a + a.T))
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(f"Cholesky failed: {exc}") from None
    if not np.all(np.diag(L) > 0):
        raise NotPositiveDefinite("non-positive Cholesky pivot")
    return L


def spd_solve(m, rhs) -> np.ndarray:
    """Solve m @ x = rhs through the Cholesky factor of m."""
    L = cholesky(m)
    b = np.asarray(rhs, dtype=float)
    return linalg.cho_solve((L, True), b)


def normal_cdf(z):
    return special.ndtr(z)


def normal_pdf(z):
    z = np.asarray(z, dtype=float)
    return np.exp(-0.5 * z * z) / np.sqrt(2.0 * np.pi)


def normal_quantile(p: float) -> float:
    """Standard normal quantile, polished by one Newton step on the CDF."""
    p = float(p)
    if not 0.0 < p < 1.0:
        raise DomainError(f"probability must lie in (0, 1), got {p!r}")
    z = float(special.ndtri(p))
    dens = float(normal_pdf(z))
    if dens > 0:
        z -= (float(special.ndtr(z)) - p) / dens
    return z


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    kind: str

    def __post_init__(self):
        if len(self.nodes) != len(self.weights):
            raise ValueError("nodes and weights differ in length")
        if np.any(self.weights <= 0):
            raise ValueError("quadrature weights must be positive")

    def integrate(self, f: Callable[[np.ndarray], np.ndarray]) -> float:
        return float(np.dot(self.weights, f(self.nodes)))

    def normal_expectation(self, f, mu: float = 0.0, sigma: float = 1.0) -> float:
        """E[f(X)] for X ~ N(mu, sigma^2); only meaningful for Gauss-Hermite."""
        if self.kind != "gauss-hermite":
            raise ValueError("normal_expectation needs a Gauss-Hermite rule")
        x = mu + np.sqrt(2.0) * sigma * self.nodes
        return float(np.dot(self.weights, f(x)) / np.sqrt(np.pi))


def make_quadrature(kind: str, order: int = 64, support=None, *,
                    points=None, density=None, dim: int = 1) -> QuadratureRule:
    """Build the quadrature rule matching a majority-model kind.

    ``gaussian``  -> raw Gauss-Hermite rule (weight e^{-x^2}, weights sum to sqrt(pi))
    ``empirical`` -> exact sum over ``points`` with weights 1/N
    ``density``   -> adaptive Simpson on the truncated support; weights carry
                     the density so that ``integrate(f)`` is E[f(X)]
    """
    if order < 2:
        raise DomainError("quadrature order must be at least 2")
    if kind == "gaussian":
        t, w = np.polynomial.hermite.hermgauss(order)
        return QuadratureRule(t, w, "gauss-hermite")
    if kind == "empirical":
        if points is None:
            raise DomainError("empirical rule needs points")
        pts = np.asarray(points, dtype=float)
        if len(pts) == 0:
            raise DomainError("empirical rule needs at least one point")
        return QuadratureRule(pts, np.full(len(pts), 1.0 / len(pts)), "exact-sum")
    if kind == "density":
        if dim != 1:
            raise UnsupportedDimension("density quadrature is one-dimensional only")
        if density is None:
            raise DomainError("density rule needs a density function")
        lo, hi = truncate_support(density, support if support is not None else (-np.inf, np.inf))
        x, w = adaptive_simpson_rule(density, lo, hi, min_panels=max(order, 512))
        dw = w * density(x)
        keep = dw > 0
        return QuadratureRule(x[keep], dw[keep], "adaptive-simpson")
    raise UnsupportedDimension(f"no quadrature for model kind {kind!r} in dimension {dim}")


def truncate_support(density, support, cutoff: float = DENSITY_CUTOFF) -> tuple[float, float]:
    """Shrink ``support`` to where density >= cutoff * peak."""
    lo, hi = float(support[0]), float(support[1])
    if not lo < hi:
        raise DomainError(f"empty support {support!r}")
    a = lo if np.isfinite(lo) else (min(-1.0, hi - 1.0) if np.isfinite(hi) else -1.0)
    b = hi if np.isfinite(hi) else (max(1.0, lo + 1.0) if np.isfinite(lo) else 1.0)
    for _ in range(64):
        grid = np.linspace(a, b, 4097)
        vals = density(grid)
        peak = float(np.max(vals))
        if peak <= 0:
            raise DomainError("density vanishes on the search window")
        grow_lo = not np.isfinite(lo) and vals[0] >= cutoff * peak
        grow_hi = not np.isfinite(hi) and vals[-1] >= cutoff * peak
        if not (grow_lo or grow_hi):
            break
        width = b - a
        if grow_lo:
            a -= width
        if grow_hi:
            b += width
    else:
        raise DomainError("density tails do not decay; cannot truncate support")
    above = np.nonzero(vals >= cutoff * peak)[0]
    step = grid[1] - grid[0]
    return max(a, grid[above[0]] - step), min(b, grid[above[-1]] + step)


def _simpson(fa, fm, fb, h):
    return h / 6.0 * (fa + 4.0 * fm + fb)


def adaptive_simpson_rule(f, a: float, b: float, tol: float = SIMPSON_TOL,
                          min_panels: int = 512, max_depth: int = 40):
    """Composite Simpson nodes/weights on [a, b], refined until every panel's
    two-half estimate of ``f`` agrees with its one-panel estimate."""
    edges = np.linspace(a, b, min_panels + 1)
    accepted: list[tuple[float, float]] = []
    stack = [(edges[i], edges[i + 1], 0) for i in range(min_panels - 1, -1, -1)]
    total_width = b - a
    while stack:
        l, r, depth = stack.pop()
        m = 0.5 * (l + r)
        fl, flm, fm, fmr, fr = f(np.array([l, 0.5 * (l + m), m, 0.5 * (m + r), r]))
        whole = _simpson(fl, fm, fr, r - l)
        halves = _simpson(fl, flm, fm, m - l) + _simpson(fm, fmr, fr, r - m)
        if abs(halves - whole) <= 15.0 * tol * (r - l) / total_width or depth >= max_depth:
            accepted.append((l, r))
        else:
            stack.append((m, r, depth + 1))
            stack.append((l, m, depth + 1))
    accepted.sort()
    nodes: dict[float, float] = {}
    for l, r in accepted:
        m = 0.5 * (l + r)
        h = 0.5 * (r - l)
        for x, c in ((l, 1.0), (0.5 * (l + m), 4.0), (m, 2.0), (0.5 * (m + r), 4.0), (r, 1.0)):
            nodes[x] = nodes.get(x, 0.0) + c * h / 6.0
    xs = np.fromiter(nodes.keys(), dtype=float)
    ws = np.fromiter(nodes.values(), dtype=float)
    order = np.argsort(xs)
    return xs[order], ws[order]


@dataclass
class Rng:
    """Seeded random stream; (seed, stream, key) fully determines the draws."""

    seed: int
    stream: int = 0
    key: tuple[int, ...] = ()
    generator: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        if self.stream < 0:
            raise DomainError("stream index must be non-negative")
        ss = np.random.SeedSequence(int(self.seed) & (2**64 - 1),
                                    spawn_key=(*map(int, self.key), int(self.stream)))
        self.generator = np.random.Generator(np.random.PCG64(ss))

    def standard_normal(self, size=None):
        return self.generator.standard_normal(size)

    def uniform(self, size=None):
        return self.generator.random(size)

    def integers(self, high: int, size=None):
        return self.generator.integers(0, high, size=size)


def mvn_sample(mean, cov, rng: Rng, size: int | None = None) -> np.ndarray:
    """Draw mean + L z with L = cholesky(cov) and z standard normal.

    Returns a d-vector, or a (size, d) array when ``size`` is given.
    """
    mu = np.atleast_1d(np.asarray(mean, dtype=float))
    L = cholesky(cov)
    if L.shape[0] != mu.shape[0]:
        raise DomainError("mean and covariance dimensions differ")
    if size is None:
        return mu + L @ rng.standard_normal(mu.shape[0])
    z = rng.standard_normal((size, mu.shape[0]))
    return mu + z @ L.T


def unit_directions(dim: int, count: int = 256) -> np.ndarray:
    """Quasi-uniform unit vectors: coordinate axes (both signs) plus ``count``
    Halton points mapped to the sphere and their antipodes. In 1D this is
    exactly {+1, -1}."""
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    from scipy.stats import qmc, norm

    axes = np.vstack([np.eye(dim), -np.eye(dim)])
    u = qmc.Halton(dim, scramble=False).random(count + 1)[1:]
    u = np.clip(u, 1e-12, 1 - 1e-12)
    g = norm.ppf(u)
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return np.vstack([axes, g, -g])


def validate_vector(v, dim: int | None = None, name: str = "vector") -> np.ndarray:
    a = np.atleast_1d(np.asarray(v, dtype=float))
    if a.ndim != 1:
        raise DomainError(f"{name} must be one-dimensional")
    if dim is not None and a.shape[0] != dim:
        raise DomainError(f"{name} has dimension {a.shape[0]}, expected {dim}")
    if not np.all(np.isfinite(a)):
        raise DomainError(f"{name} has non-finite entries")
    return a


__all__ = [
    "QuadratureRule", "Rng", "as_matrix", "cholesky", "make_quadrature", "mvn_sample",
    "normal_cdf", "normal_pdf", "normal_quantile", "spd_solve", "truncate_support",
    "unit_directions",
]

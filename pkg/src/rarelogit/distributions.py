"""Majority-class models and exponentially tilted moments.

For a majority law F0 and tilt b the quantities used throughout are

    m0 = E[e^{k b.(X - c)}],  m1 = E[e^{k b.(X - c)} (X - c)],
    m2 = E[e^{k b.(X - c)} (X - c)(X - c)^T]

with k in {1, 2} and an optional centre c (default 0). Gaussian models are
handled in closed form; empirical models by exact sums; tabulated/analytic
1D densities by quadrature.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Union

import numpy as np

from . import numerics
from .errors import DomainError, InvalidModel, MomentOverflow, UnsupportedDimension
from .numerics import Rng, cholesky, make_quadrature, normal_cdf, validate_vector

OVERFLOW_LIMIT = 1e300
LOG_OVERFLOW = float(np.log(OVERFLOW_LIMIT))
GH_ORDER = 64
DENSITY_NORM_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class GaussianModel:
    mu: np.ndarray
    cov: np.ndarray
    kind: str = field(default="gaussian", init=False)

    def __post_init__(self):
        mu = validate_vector(self.mu, name="mu")
        cov = numerics.as_matrix(self.cov)
        if cov.shape[0] != mu.shape[0]:
            raise InvalidModel("mu and cov dimensions differ")
        try:
            L = cholesky(cov)
        except Exception as exc:
            raise InvalidModel(f"covariance is not positive definite: {exc}") from None
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "chol", L)

    @classmethod
    def univariate(cls, mu: float, sigma: float) -> "GaussianModel":
        if not sigma > 0:
            raise InvalidModel("sigma must be positive")
        return cls(np.array([mu], float), np.array([[sigma * sigma]]))

    @property
    def dim(self) -> int:
        return self.mu.shape[0]

    def mean(self) -> np.ndarray:
        return self.mu.copy()


@dataclass(frozen=True, eq=False)
class EmpiricalModel:
    """Uniform distribution on a finite list of points (rows)."""

    points: np.ndarray
    kind: str = field(default="empirical", init=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or len(pts) == 0:
            raise InvalidModel("empirical model needs at least one point")
        if not np.all(np.isfinite(pts)):
            raise InvalidModel("empirical model has non-finite points")
        object.__setattr__(self, "points", pts)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def degenerate(self) -> bool:
        return bool(np.all(self.points == self.points[0]))

    def mean(self) -> np.ndarray:
        return self.points.mean(axis=0)


@dataclass(frozen=True, eq=False)
class DensityModel:
    """A one-dimensional density on ``support`` (bounds may be infinite)."""

    density: Callable[[np.ndarray], np.ndarray]
    support: tuple[float, float] = (-np.inf, np.inf)
    kind: str = field(default="density", init=False)

    def __post_init__(self):
        total = self.rule.integrate(lambda x: np.ones_like(x))
        if abs(total - 1.0) > DENSITY_NORM_TOL:
            raise InvalidModel(f"density integrates to {total!r}, not 1")

    @property
    def dim(self) -> int:
        return 1

    @cached_property
    def rule(self) -> numerics.QuadratureRule:
        dens = self.density

        def safe(x):
            return np.asarray(dens(np.asarray(x, dtype=float)), dtype=float)

        return make_quadrature("density", GH_ORDER, self.support, density=safe)

    @cached_property
    def _inverse_cdf_table(self):
        x = self.rule.nodes
        c = np.cumsum(self.rule.weights)
        c = np.concatenate([[0.0], c / c[-1]])
        x = np.concatenate([[x[0]], x])
        return c, x

    def mean(self) -> np.ndarray:
        return np.array([self.rule.integrate(lambda x: x)])


MajorityModel = Union[GaussianModel, EmpiricalModel, DensityModel]


@dataclass(frozen=True, eq=False)
class MinoritySample:
    points: np.ndarray
    mean: np.ndarray
    bound: float

    @classmethod
    def from_points(cls, points) -> "MinoritySample":
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or len(pts) == 0:
            raise DomainError("minority sample needs at least one point")
        if not np.all(np.isfinite(pts)):
            raise DomainError("minority points must be finite")
        return cls(pts, pts.mean(axis=0), float(np.max(np.linalg.norm(pts, axis=1))))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class TiltedMoments:
    m0: float
    m1: np.ndarray
    m2: np.ndarray
    tilt: np.ndarray
    multiplier: int
    center: np.ndarray

    @property
    def mean(self) -> np.ndarray:
        """Tilted mean of X - center."""
        return self.m1 / self.m0

    @property
    def cov(self) -> np.ndarray:
        mu = self.mean
        c = self.m2 / self.m0 - np.outer(mu, mu)
        return 0.5 * (c + c.T)


def gaussian_tilted_mean(mu: float, sigma2: float, t: float) -> float:
    """Mean of the exponentially tilted normal, N(mu + t sigma2, sigma2)."""
    if not sigma2 > 0:
        raise DomainError("sigma2 must be positive")
    return mu + t * sigma2


def tilted_moments(model: MajorityModel, beta, k: int = 1, center=None,
                   method: str = "auto") -> TiltedMoments:
    """Tilted moments of ``model`` at tilt ``beta`` with multiplier ``k``.

    ``method='quadrature'`` forces the numerical route for Gaussian models
    (Gauss-Hermite, tensor product for d <= 3); it exists for cross-checks.
    """
    if k not in (1, 2):
        raise DomainError("multiplier k must be 1 or 2")
    d = model.dim
    b = validate_vector(beta, d, "beta")
    c = np.zeros(d) if center is None else validate_vector(center, d, "center")
    if isinstance(model, GaussianModel):
        if method == "quadrature":
            x, w = _gaussian_nodes(model)
            return _weighted_moments(x, w, b, k, c)
        return _gaussian_moments(model, b, k, c)
    if isinstance(model, EmpiricalModel):
        w = np.full(len(model.points), 1.0 / len(model.points))
        return _weighted_moments(model.points, w, b, k, c)
    if isinstance(model, DensityModel):
        rule = model.rule
        return _weighted_moments(rule.nodes[:, None], rule.weights, b, k, c)
    raise InvalidModel(f"unknown model type {type(model).__name__}")


def _gaussian_moments(model: GaussianModel, b, k, c) -> TiltedMoments:
    kb = k * b
    shift = model.cov @ kb
    log_m0 = float(kb @ (model.mu - c) + 0.5 * kb @ shift)
    if log_m0 > LOG_OVERFLOW:
        raise MomentOverflow(f"tilted integral e^{log_m0:.1f} exceeds {OVERFLOW_LIMIT:g}")
    m0 = float(np.exp(log_m0))
    mt = model.mu + shift - c
    return TiltedMoments(m0, m0 * mt, m0 * (model.cov + np.outer(mt, mt)), b, k, c)


def _gaussian_nodes(model: GaussianModel, order: int = GH_ORDER):
    d = model.dim
    if d > 3:
        raise UnsupportedDimension("Gaussian quadrature cross-check supports d <= 3")
    if d > 1:
        order = min(order, 48 if d == 2 else 24)
    rule = make_quadrature("gaussian", order)
    grids = np.meshgrid(*([rule.nodes] * d), indexing="ij")
    t = np.stack([g.ravel() for g in grids], axis=1)
    wgrids = np.meshgrid(*([rule.weights] * d), indexing="ij")
    w = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1) / np.pi ** (d / 2)
    x = model.mu + np.sqrt(2.0) * t @ model.chol.T
    return x, w


def _weighted_moments(x: np.ndarray, w: np.ndarray, b, k, c) -> TiltedMoments:
    y = x - c
    expo = k * (y @ b)
    top = float(np.max(expo))
    if not np.isfinite(top) or top > LOG_OVERFLOW:
        raise MomentOverflow(f"tilted integrand e^{top:.1f} exceeds {OVERFLOW_LIMIT:g}")
    ew = w * np.exp(expo)
    m0 = float(np.sum(ew))
    if not m0 > 0 or m0 > OVERFLOW_LIMIT:
        raise MomentOverflow(f"tilted mass {m0!r} outside floating-point range")
    m1 = ew @ y
    m2 = (y * ew[:, None]).T @ y
    return TiltedMoments(m0, m1, 0.5 * (m2 + m2.T), b, k, c)


def sample_majority(model: MajorityModel, count: int, rng: Rng) -> np.ndarray:
    """``count`` i.i.d. draws from the model as a (count, d) array."""
    if count < 1:
        raise DomainError("count must be at least 1")
    if isinstance(model, GaussianModel):
        return numerics.mvn_sample(model.mu, model.cov, rng, size=count)
    if isinstance(model, EmpiricalModel):
        return model.points[rng.integers(len(model.points), size=count)]
    if isinstance(model, DensityModel):
        cdf, x = model._inverse_cdf_table
        return np.interp(rng.uniform(count), cdf, x)[:, None]
    raise InvalidModel(f"unknown model type {type(model).__name__}")


@dataclass(frozen=True)
class SurroundsResult:
    satisfied: bool
    worst_mass: float
    worst_direction: np.ndarray


def surrounds_check(model, xbar, epsilon: float = 0.1, directions: int = 256) -> SurroundsResult:
    """Smallest F0-mass of {x : (x - xbar).w > epsilon} over sampled unit w.

    ``model`` may also be a raw (N, d) sample, treated as empirical. This is a
    falsifier in d >= 2: a zero mass proves failure, a positive one only
    suggests the condition holds.
    """
    if not epsilon > 0 or directions < 1:
        raise DomainError("need epsilon > 0 and directions >= 1")
    if not isinstance(model, (GaussianModel, EmpiricalModel, DensityModel)):
        model = EmpiricalModel(model)
    xb = validate_vector(xbar, model.dim, "xbar")
    dirs = numerics.unit_directions(model.dim, directions)
    if isinstance(model, GaussianModel):
        sd = np.sqrt(np.einsum("ij,jk,ik->i", dirs, model.cov, dirs))
        mass = 1.0 - normal_cdf((epsilon - dirs @ (model.mu - xb)) / sd)
    elif isinstance(model, EmpiricalModel):
        mass = np.mean((model.points - xb) @ dirs.T > epsilon, axis=0)
    else:
        rule = model.rule
        mass = ((rule.nodes[:, None] - xb) @ dirs.T > epsilon).T.astype(float) @ rule.weights
    i = int(np.argmin(mass))
    worst = float(mass[i])
    return SurroundsResult(worst > 0, worst, dirs[i].copy())

"""Limiting slope, its asymptotic covariance, intervals and sample-size plans.

All tilted expectations here are weighted by e^{b.(x - xbar)} rather than
e^{b.x}; the two differ by the constant factor e^{b.xbar} (squared for V),
which cancels in Sigma = H^-1 V H^-1 and keeps the integrals in range.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, linalg

from .distributions import (
    DensityModel,
    EmpiricalModel,
    GaussianModel,
    MajorityModel,
    surrounds_check,
    tilted_moments,
)
from .errors import (
    DegenerateHessian,
    MomentOverflow,
    NoInteriorSolution,
    NotPositiveDefinite,
    UnsupportedDimension,
)
from .numerics import cholesky, normal_quantile, spd_solve, validate_vector

INT64_MAX = 2**63 - 1
BETA_NORM_LIMIT = 1e3


@dataclass(frozen=True, eq=False)
class LimitInference:
    beta_star: np.ndarray
    H: np.ndarray
    V: np.ndarray
    Sigma: np.ndarray
    chol_A: np.ndarray
    xbar: np.ndarray
    residual: float

    @property
    def dim(self) -> int:
        return self.beta_star.shape[0]

    def half_widths(self, N: int, theta: float = 0.05) -> np.ndarray:
        z = normal_quantile(1.0 - theta / 2.0)
        return np.linalg.norm(self.chol_A, axis=1) * z / math.sqrt(N)


@dataclass(frozen=True, eq=False)
class ConfidenceInterval:
    level: float
    N: int
    lower: np.ndarray
    upper: np.ndarray

    def contains(self, beta) -> bool:
        b = np.atleast_1d(beta)
        return bool(np.all((self.lower <= b) & (b <= self.upper)))


@dataclass(frozen=True)
class SampleSizePlan:
    N: int
    saturated: bool
    z_score: float
    epsilon: float


def _reject_degenerate(model: MajorityModel):
    if isinstance(model, EmpiricalModel) and model.degenerate:
        raise DegenerateHessian("empirical model has a single distinct point")


def solve_beta_star(model: MajorityModel, xbar, tol: float = 1e-10,
                    max_iter: int = 100) -> np.ndarray:
    """Tilt b at which the tilted mean of ``model`` equals ``xbar``.

    Damped Newton on the strictly convex log E[e^{b.(X - xbar)}], whose
    gradient is the tilted mean minus xbar and whose Hessian is the tilted
    covariance.
    """
    _reject_degenerate(model)
    xb = validate_vector(xbar, model.dim, "xbar")
    if not surrounds_check(model, xb).satisfied:
        warnings.warn("majority model may not surround xbar; a finite limit may not exist",
                      RuntimeWarning, stacklevel=2)
    beta = np.zeros(model.dim)
    tm = tilted_moments(model, beta, 1, center=xb)
    obj = math.log(tm.m0)
    for _ in range(max_iter + 1):
        g = tm.mean
        if np.linalg.norm(g) < tol:
            return beta
        try:
            step = spd_solve(tm.cov, g)
        except NotPositiveDefinite:
            raise NoInteriorSolution("tilted covariance is singular; xbar may be "
                                     "outside the tiltable range") from None
        t = 1.0
        slack = 64 * np.spacing(max(abs(obj), 1.0))
        for _ in range(60):
            cand = beta - t * step
            if np.linalg.norm(cand) > BETA_NORM_LIMIT:
                raise NoInteriorSolution(f"|beta| exceeded {BETA_NORM_LIMIT:g}; xbar is "
                                         "likely outside the tiltable range of F0")
            try:
                ctm = tilted_moments(model, cand, 1, center=xb)
            except MomentOverflow:
                t *= 0.5
                continue
            cobj = math.log(ctm.m0)
            if cobj <= obj + slack:
                break
            t *= 0.5
        else:
            raise NoInteriorSolution("line search failed while solving for beta*")
        beta, tm, obj = cand, ctm, cobj
    raise NoInteriorSolution(f"no convergence after {max_iter} Newton steps")


def gaussian_beta_star(mu, cov, xbar) -> np.ndarray:
    """cov^-1 (xbar - mu): the limit slope for a Gaussian majority."""
    m = validate_vector(mu, name="mu")
    return np.atleast_1d(spd_solve(np.atleast_2d(cov), validate_vector(xbar, len(m)) - m))


def compute_covariance(model: MajorityModel, xbar, beta_star) -> LimitInference:
    _reject_degenerate(model)
    xb = validate_vector(xbar, model.dim, "xbar")
    b = validate_vector(beta_star, model.dim, "beta_star")
    first = tilted_moments(model, b, 1, center=xb)
    H = first.m2
    V = tilted_moments(model, b, 2, center=xb).m2
    try:
        LH = cholesky(H)
    except NotPositiveDefinite as exc:
        raise DegenerateHessian(f"H is not positive definite: {exc}") from None
    HinvV = linalg.cho_solve((LH, True), V)
    Sigma = linalg.cho_solve((LH, True), HinvV.T)
    Sigma = 0.5 * (Sigma + Sigma.T)
    try:
        A = cholesky(Sigma)
    except NotPositiveDefinite as exc:
        raise DegenerateHessian(f"Sigma is not positive definite: {exc}") from None
    return LimitInference(b, H, V, Sigma, A, xb, float(np.linalg.norm(first.mean)))


def limit_inference(model: MajorityModel, xbar, tol: float = 1e-10) -> LimitInference:
    return compute_covariance(model, xbar, solve_beta_star(model, xbar, tol=tol))


def sigma_1d_gaussian(xbar: float, mu: float, sigma: float) -> float:
    """Closed-form asymptotic variance for a N(mu, sigma^2) majority."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    d2 = (xbar - mu) ** 2
    s2 = sigma * sigma
    try:
        return math.exp(d2 / s2) * (d2 + s2) / (s2 * s2)
    except OverflowError:
        return math.inf


def sandwich_variance_1d(model: MajorityModel, xbar: float, beta_star: float) -> float:
    """Var(g')/E[g'']^2 for g(x; b) = e^{b(x - xbar)}, derivatives in b.

    Deliberately independent of ``tilted_moments``: adaptive QUADPACK for
    continuous models, plain array means for empirical ones.
    """
    if model.dim != 1:
        raise UnsupportedDimension("sandwich form is one-dimensional")
    xb = float(np.ravel(xbar)[0])
    b = float(np.ravel(beta_star)[0])

    def g1(x):
        return (x - xb) * np.exp(b * (x - xb))

    def g2(x):
        return (x - xb) ** 2 * np.exp(b * (x - xb))

    if isinstance(model, EmpiricalModel):
        x = model.points[:, 0]
        return float(np.var(g1(x)) / np.mean(g2(x)) ** 2)

    if isinstance(model, GaussianModel):
        mu = float(model.mu[0])
        sd = math.sqrt(float(model.cov[0, 0]))

        def pdf(x):
            return math.exp(-0.5 * ((x - mu) / sd) ** 2) / (sd * math.sqrt(2 * math.pi))

        peaks = [mu, mu + b * sd * sd, mu + 2 * b * sd * sd]
        lo, hi = min(peaks) - 30 * sd, max(peaks) + 30 * sd
    elif isinstance(model, DensityModel):
        dens = model.density

        def pdf(x):
            return float(dens(np.array([x]))[0])

        lo, hi = (float(v) for v in model.rule.nodes[[0, -1]])
        peaks = [float(model.mean()[0])]
    else:
        raise UnsupportedDimension(f"no sandwich path for {type(model).__name__}")

    def expect(f, epsabs=0.0):
        val, _ = integrate.quad(lambda x: f(x) * pdf(x), lo, hi, points=sorted(set(peaks)),
                                epsabs=epsabs, epsrel=1e-11, limit=500)
        return val

    second = expect(lambda x: g1(x) ** 2)
    # E[g'] vanishes at beta*, so only an absolute tolerance is meaningful
    e1 = expect(g1, epsabs=1e-12 * math.sqrt(second))
    return (second - e1 * e1) / expect(g2) ** 2


def confidence_interval(inf: LimitInference, N: int, theta: float = 0.05) -> ConfidenceInterval:
    """Coordinatewise beta* +/- (row norm of A) z_{theta/2} / sqrt(N)."""
    if N < 1:
        raise ValueError("N must be positive")
    half = inf.half_widths(N, theta)
    return ConfidenceInterval(1.0 - theta, int(N), inf.beta_star - half, inf.beta_star + half)


def plan_sample_size(xbar: float, mu: float, sigma: float, epsilon: float) -> SampleSizePlan:
    """N = ceil(e^{2 z^2} / eps^2) with z = (xbar - mu) / sigma, saturating at 2^63 - 1."""
    if not epsilon > 0 or not sigma > 0:
        raise ValueError("epsilon and sigma must be positive")
    z = (xbar - mu) / sigma
    log_n = 2 * z * z - 2 * math.log(epsilon)
    if log_n >= math.log(INT64_MAX):
        return SampleSizePlan(INT64_MAX, True, z, epsilon)
    value = math.exp(2 * z * z) / (epsilon * epsilon)
    n = math.ceil(value * (1 - 4 * np.finfo(float).eps))
    if n > INT64_MAX:
        return SampleSizePlan(INT64_MAX, True, z, epsilon)
    return SampleSizePlan(n, False, z, epsilon)

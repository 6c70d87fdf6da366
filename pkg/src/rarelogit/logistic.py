"""Centered logistic log-likelihood and its damped Newton maximiser.

With u = x - xbar (xbar the minority mean) the objective is

    L(a, b) = n a - sum_j softplus(a + b.u_j) - sum_i softplus(a + b.u_i)

over the n minority points j and the N majority points i.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .distributions import MinoritySample
from .errors import DomainError, MaxIterations, NotPositiveDefinite, SeparationSuspected
from .numerics import spd_solve

BETA_NORM_LIMIT = 1e3
MAX_HALVINGS = 30
# alpha-curvature sum(s(1 - s)) equals about n at an interior optimum and
# collapses towards 0 when the classes separate.
SATURATION_RATIO = 1e-9


@dataclass(frozen=True, eq=False)
class LogisticData:
    majority: np.ndarray
    minority: MinoritySample
    centered: bool = True

    def __post_init__(self):
        X = np.asarray(self.majority, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if X.ndim != 2 or len(X) < 1:
            raise DomainError("need at least one majority point")
        if X.shape[1] != self.minority.dim:
            raise DomainError("majority and minority dimensions differ")
        if not np.all(np.isfinite(X)):
            raise DomainError("majority features must be finite")
        object.__setattr__(self, "majority", X)
        object.__setattr__(self, "centered", True)

    @classmethod
    def from_arrays(cls, majority, minority) -> "LogisticData":
        if not isinstance(minority, MinoritySample):
            minority = MinoritySample.from_points(minority)
        return cls(majority, minority)

    @property
    def N(self) -> int:
        return self.majority.shape[0]

    @property
    def n(self) -> int:
        return self.minority.n

    @property
    def dim(self) -> int:
        return self.majority.shape[1]

    def design(self) -> np.ndarray:
        """Centered features of all N + n rows, majority first."""
        return np.vstack([self.majority, self.minority.points]) - self.minority.mean


@dataclass(frozen=True)
class FitResult:
    alpha: float
    beta: np.ndarray
    iterations: int
    grad_norm: float
    converged: bool
    N: int
    n: int
    loss: float = float("nan")


def _logits(U, alpha, beta):
    return alpha + U @ np.atleast_1d(np.asarray(beta, dtype=float))


def log_loss(data: LogisticData, alpha: float, beta) -> float:
    z = _logits(data.design(), alpha, beta)
    return float(data.n * alpha - np.sum(np.logaddexp(0.0, z)))


def gradient(data: LogisticData, alpha: float, beta) -> np.ndarray:
    """Gradient in (alpha, beta)."""
    U = data.design()
    s = expit(_logits(U, alpha, beta))
    return np.concatenate([[data.n - s.sum()], -(s @ U)])


def hessian(data: LogisticData, alpha: float, beta) -> np.ndarray:
    U = data.design()
    s = expit(_logits(U, alpha, beta))
    w = s * (1.0 - s)
    A = np.hstack([np.ones((len(U), 1)), U])
    h = -(A * w[:, None]).T @ A
    return 0.5 * (h + h.T)


def fit(data: LogisticData, tol: float = 1e-10, max_iter: int = 100,
        trace: list | None = None) -> FitResult:
    """Maximise the centered log-likelihood jointly in (alpha, beta).

    Newton steps are halved (at most 30 times) until the objective does not
    fall by more than rounding noise. Accepted iterates are appended to
    ``trace`` as (theta, loss) when a list is given.
    """
    U = data.design()
    A = np.hstack([np.ones((len(U), 1)), U])
    n = data.n
    theta = np.concatenate([[np.log(n / data.N)], np.zeros(data.dim)])

    def loss(th):
        return float(n * th[0] - np.sum(np.logaddexp(0.0, A @ th)))

    current = loss(theta)
    if trace is not None:
        trace.append((theta.copy(), current))
    for it in range(max_iter + 1):
        s = expit(A @ theta)
        g = np.concatenate([[n - s.sum()], -(s @ U)])
        gnorm = float(np.linalg.norm(g))
        if gnorm < tol:
            return FitResult(float(theta[0]), theta[1:].copy(), it, gnorm, True,
                             data.N, n, current)
        if it == max_iter:
            break
        w = s * (1.0 - s)
        if w.sum() < SATURATION_RATIO * n:
            raise SeparationSuspected(
                "fitted probabilities saturated; the classes look separable")
        neg_h = (A * w[:, None]).T @ A
        try:
            step = spd_solve(0.5 * (neg_h + neg_h.T), g)
        except NotPositiveDefinite:
            raise SeparationSuspected("Hessian solve failed; no finite maximiser") from None
        slack = 64 * np.spacing(max(abs(current), 1.0))
        t = 1.0
        for _ in range(MAX_HALVINGS + 1):
            cand = theta + t * step
            if np.linalg.norm(cand[1:]) > BETA_NORM_LIMIT:
                raise SeparationSuspected(f"|beta| exceeded {BETA_NORM_LIMIT:g}")
            value = loss(cand)
            if value >= current - slack:
                break
            t *= 0.5
        else:
            return FitResult(float(theta[0]), theta[1:].copy(), it, gnorm, False,
                             data.N, n, current)
        theta, current = cand, value
        if trace is not None:
            trace.append((theta.copy(), current))
    raise MaxIterations(f"no convergence after {max_iter} iterations (|grad|={gnorm:.3g})")

"""Seeded Monte Carlo validation of the limiting normal law for beta_N."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .asymptotics import LimitInference, confidence_interval, limit_inference
from .distributions import MajorityModel, MinoritySample, sample_majority
from .errors import (
    DegenerateHessian,
    DomainError,
    EmptyInput,
    LimitSolveFailed,
    NoInteriorSolution,
    RareLogitError,
)
from .logistic import LogisticData, fit
from .numerics import Rng, normal_cdf


@dataclass
class MCConfig:
    model: MajorityModel
    minority: MinoritySample
    N_grid: Sequence[int]
    replicates: int = 100
    seed: int = 0
    theta: float = 0.05
    workers: int = 1
    tol: float = 1e-10

    def __post_init__(self):
        self.N_grid = [int(N) for N in self.N_grid]
        if self.replicates < 2:
            raise DomainError("need at least 2 replicates")
        if not self.N_grid or min(self.N_grid) < self.minority.n:
            raise DomainError("every N in the grid must be at least the minority size n")
        if not 0 < self.theta < 1:
            raise DomainError("theta must lie in (0, 1)")
        if self.model.dim != self.minority.dim:
            raise DomainError("model and minority dimensions differ")


@dataclass
class MCRecord:
    N: int
    beta_draws: np.ndarray
    alpha_draws: np.ndarray
    standardized: np.ndarray
    ks: float
    coverage: float
    mean_alpha_decay: float
    failures: int
    failure_codes: list[str] = field(default_factory=list)


@dataclass
class MCReport:
    beta_star: np.ndarray
    Sigma: np.ndarray
    theta: float
    seed: int
    replicates: int
    records: list[MCRecord]

    def record(self, N: int) -> MCRecord:
        for r in self.records:
            if r.N == N:
                return r
        raise KeyError(N)


class Ecdf:
    """Right-continuous empirical distribution function."""

    def __init__(self, values):
        v = np.sort(np.ravel(np.asarray(values, dtype=float)))
        if v.size == 0:
            raise EmptyInput("ECDF needs at least one value")
        self.sorted_values = v

    @property
    def n(self) -> int:
        return self.sorted_values.size

    def __call__(self, x):
        return np.searchsorted(self.sorted_values, x, side="right") / self.n

    def left_limit(self, x):
        return np.searchsorted(self.sorted_values, x, side="left") / self.n


def ecdf(values) -> Ecdf:
    return Ecdf(values)


def ks_distance(e: Ecdf, cdf: Callable) -> float:
    """sup |F_hat - F|, attained at a sample point or just left of one."""
    x = np.unique(e.sorted_values)
    right = np.abs(e(x) - cdf(x))
    left = np.abs(e.left_limit(x) - cdf(np.nextafter(x, -np.inf)))
    return float(max(right.max(), left.max()))


def _normal_ks(values: np.ndarray, var: float) -> float:
    sd = math.sqrt(var)
    return ks_distance(Ecdf(values), lambda x: normal_cdf(np.asarray(x) / sd))


def _solve_limit(config: MCConfig) -> LimitInference:
    try:
        return limit_inference(config.model, config.minority.mean)
    except (NoInteriorSolution, DegenerateHessian) as exc:
        raise LimitSolveFailed(f"limit computation failed: {exc}") from exc


def _replicate(config: MCConfig, N: int, r: int):
    X = sample_majority(config.model, N, Rng(config.seed, r, key=(N,)))
    try:
        res = fit(LogisticData(X, config.minority), tol=config.tol)
    except RareLogitError as exc:
        return None, None, exc.code
    if not res.converged:
        return None, None, "NOT_CONVERGED"
    return res.beta, res.alpha, None


def _run_N(config: MCConfig, N: int, inf: LimitInference) -> MCRecord:
    def job(r):
        return _replicate(config, N, r)

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(job, range(config.replicates)))
    else:
        results = [job(r) for r in range(config.replicates)]
    ok = [(b, a) for b, a, code in results if code is None]
    codes = [code for _, _, code in results if code is not None]
    d = inf.dim
    betas = np.array([b for b, _ in ok]).reshape(-1, d)
    alphas = np.array([a for _, a in ok], dtype=float)
    std = math.sqrt(N) * (betas - inf.beta_star)
    if len(ok) == 0:
        return MCRecord(N, betas, alphas, std, float("nan"), float("nan"), float("nan"),
                        len(codes), codes)
    ks = max(_normal_ks(std[:, k], inf.Sigma[k, k]) for k in range(d))
    ci = confidence_interval(inf, N, config.theta)
    coverage = float(np.mean([ci.contains(b) for b in betas]))
    decay = float(np.mean(N * np.exp(alphas)))
    return MCRecord(N, betas, alphas, std, ks, coverage, decay, len(codes), codes)


def run_experiment(config: MCConfig, inference: LimitInference | None = None) -> MCReport:
    """Fit ``replicates`` fresh datasets at each N and compare with the limit law.

    Replicate r at size N draws from stream (seed, key=N, stream=r), so the
    report does not depend on ``workers`` or on the order of ``N_grid``.
    """
    inf = inference if inference is not None else _solve_limit(config)
    records = [_run_N(config, N, inf) for N in config.N_grid]
    return MCReport(inf.beta_star, inf.Sigma, config.theta, config.seed,
                    config.replicates, records)


def alpha_decay_scan(config: MCConfig, report: MCReport | None = None) -> list[tuple[int, float]]:
    """(N, mean N e^{alpha_N}) per grid point."""
    rep = report if report is not None else run_experiment(config)
    return [(r.N, r.mean_alpha_decay) for r in rep.records]

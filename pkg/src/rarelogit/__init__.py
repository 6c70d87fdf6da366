"""Asymptotic inference for logistic regression with a vanishing minority class."""
from .asymptotics import (
    ConfidenceInterval,
    LimitInference,
    SampleSizePlan,
    compute_covariance,
    confidence_interval,
    gaussian_beta_star,
    limit_inference,
    plan_sample_size,
    sandwich_variance_1d,
    sigma_1d_gaussian,
    solve_beta_star,
)
from .distributions import (
    DensityModel,
    EmpiricalModel,
    GaussianModel,
    MinoritySample,
    TiltedMoments,
    gaussian_tilted_mean,
    sample_majority,
    surrounds_check,
    tilted_moments,
)
from .logistic import FitResult, LogisticData, fit, gradient, hessian, log_loss
from .montecarlo import MCConfig, MCReport, alpha_decay_scan, ecdf, ks_distance, run_experiment
from .numerics import Rng, cholesky, make_quadrature, mvn_sample, normal_cdf, normal_quantile, spd_solve

__version__ = "0.1.0"

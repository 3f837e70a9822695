"""Front-fluctuation lab for the stochastic Cahn-Hilliard equation."""

from ._kinkflux import (
    ArgumentError,
    ConfigError,
    DomainError,
    GridError,
    __version__,
    cov_r,
    cov_y,
    green_G,
    h2_covariance,
    kinf,
    kstar,
    phi,
    run_ensemble,
    sample_limit,
    y_variance_coefficient,
)

__all__ = [
    "ArgumentError",
    "ConfigError",
    "DomainError",
    "GridError",
    "__version__",
    "cov_r",
    "cov_y",
    "green_G",
    "h2_covariance",
    "kinf",
    "kstar",
    "phi",
    "run_ensemble",
    "sample_limit",
    "y_variance_coefficient",
]

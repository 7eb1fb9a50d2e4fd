"""Closed-form asymptotic laws used as overlays and Monte Carlo targets.

Means are stated for the ``sqrt(k)``-normalized estimators and depend on the
bias regime ``lambda = lim sqrt(k) a(n/k)``, which is an input here (it is
only observable in simulation).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._errors import DomainError, UnsupportedModelError
from .distributions import ReferenceModel

__all__ = [
    "AsymLaw",
    "epd_gamma_law",
    "gpd_bias_factor",
    "gpd_gamma_law",
    "hill_law",
    "epd_joint_covariance",
    "TailEmpiricalMoments",
    "tail_empirical_moments",
    "lambda_approx",
    "theory_overlay",
]


@dataclass(frozen=True)
class AsymLaw:
    """Normal limit ``N(mean, variance)`` of ``sqrt(k) (estimate - gamma)``."""

    mean: float
    variance: float

    def __post_init__(self):
        if self.variance < 0:
            raise ValueError("variance must be nonnegative")


def epd_gamma_law(gamma: float, rho: float) -> AsymLaw:
    return AsymLaw(0.0, gamma**2 * (1 - rho) ** 2 / rho**2)


def gpd_bias_factor(gamma: float, rho: float) -> float:
    return rho * (1 + gamma) * (gamma + rho) / (gamma * (1 - rho) * (1 + gamma - rho))


def gpd_gamma_law(gamma: float, rho: float, lam: float) -> AsymLaw:
    """GPD maximum likelihood estimator; unbiased only when ``rho = -gamma``."""
    return AsymLaw(lam * gpd_bias_factor(gamma, rho), (1 + gamma) ** 2)


def hill_law(gamma: float, rho: float, lam: float) -> AsymLaw:
    return AsymLaw(lam * rho / (1 - rho), gamma**2)


def epd_joint_covariance(gamma: float, rho: float) -> np.ndarray:
    """Covariance of the joint limit of the EPD ``(gamma, delta)`` estimators and ``Z``."""
    g2 = gamma * gamma
    s11 = g2 * (1 - rho) ** 2 / rho**2
    s12 = -g2 * (1 - 2 * rho) * (1 - rho) / rho**3
    s22 = g2 * (1 - 2 * rho) * (1 - rho) ** 2 / rho**4
    return np.array([[s11, s12, 0.0], [s12, s22, 0.0], [0.0, 0.0, 1.0]])


class TailEmpiricalMoments(NamedTuple):
    mean_E_s1: float
    cov_E: float
    cov_Gamma_E: float
    var_Gamma: float
    mean_Gamma: float


def tail_empirical_moments(gamma: float, rho: float, lam: float, s1: float, s2: float) -> TailEmpiricalMoments:
    """Moments of the Gaussian limit of the Hill and moment processes.

    ``mean_E_s1`` and ``cov_Gamma_E`` are evaluated at ``s1``; ``cov_E`` is
    the covariance between the process at ``s1`` and at ``s2``.
    """
    if s1 > 0 or s2 > 0:
        raise DomainError("moment exponents must be <= 0")
    pole = 1 - s1 * gamma - s2 * gamma
    if pole <= 0 or 1 - s1 * gamma - rho <= 0:
        raise DomainError("moment exponents hit a pole of the covariance")
    mean_E = lam * s1 * rho / ((1 - s1 * gamma - rho) * (1 - s1 * gamma))
    cov_E = s1 * s2 * gamma**2 / (pole * (1 - s1 * gamma) * (1 - s2 * gamma))
    cov_GE = s1 * gamma**2 / (1 - s1 * gamma) ** 2
    return TailEmpiricalMoments(mean_E, cov_E, cov_GE, gamma**2, lam * rho / (1 - rho))


def _weissman_hill_law(gamma: float, rho: float, lam: float, q: float) -> AsymLaw:
    # Weissman tail probability with the Hill estimate, sqrt(k)(p_hat/p - 1)
    lq = math.log(q)
    mean = -lam * rho / gamma * ((q ** (-rho) - 1) / rho + lq / (1 - rho))
    return AsymLaw(mean, 1 + lq**2)


def lambda_approx(model: ReferenceModel, n: int, k: int) -> float:
    """``sqrt(k) delta(U(n/k))``, a finite-sample stand-in for ``lambda``.

    Uses ``a(y) ~ delta(U(y))``; approximate, and only as good as the model's
    ``delta`` expansion.
    """
    u = model.quantile(1.0 - k / n)
    return math.sqrt(k) * float(model.delta(u))


def theory_overlay(model: ReferenceModel, estimator: str, n: int, k: int) -> tuple[float, float]:
    """Asymptotic ``(variance, mean)`` of ``sqrt(k) (estimate - gamma)``.

    Returns ``(nan, nan)`` when the model has no second-order structure.
    """
    rho = model.true_rho
    if rho is None:
        return math.nan, math.nan
    gamma = model.true_gamma
    try:
        lam = lambda_approx(model, n, k)
    except UnsupportedModelError:
        lam = math.nan
    if estimator == "epd":
        law = epd_gamma_law(gamma, rho)
    elif estimator == "gpd":
        law = gpd_gamma_law(gamma, rho, lam)
    elif estimator == "hill":
        law = hill_law(gamma, rho, lam)
    else:
        raise ValueError(f"unknown estimator {estimator!r}")
    return law.variance, law.mean

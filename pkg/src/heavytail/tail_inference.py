"""Tail probabilities, extreme quantiles and asymptotic confidence intervals."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, NamedTuple

import numpy as np
from scipy import special

from ._errors import ArgumentError, DomainError, EstimationError
from .distributions import EpdParams, epd_isf, epd_logsf
from .estimators import EpdFit, GpdFit

__all__ = [
    "Interval",
    "TailEstimate",
    "project_params",
    "tail_prob_epd",
    "tail_prob_weissman",
    "tail_prob_gpd",
    "extreme_quantile",
    "normal_upper_quantile",
    "ci_gamma",
    "asymp_var_tailprob",
    "ci_tail_prob",
]

#: margin kept between a projected delta and the admissibility bound
PROJECTION_MARGIN = 1e-9


class Interval(NamedTuple):
    low: float
    high: float


@dataclass(frozen=True)
class TailEstimate:
    """Estimate of ``P(X > x)`` from the top ``k`` of ``n`` observations."""

    p_hat: float
    q_hat: float
    method: Literal["epd", "weissman", "gpd"]
    k: int
    n: int
    x: float
    ci_low: float | None = None
    ci_high: float | None = None
    projected: bool = False
    ci_floored: bool = False


def normal_upper_quantile(alpha: float) -> float:
    """``z_{alpha/2}``: the ``1 - alpha/2`` quantile of the standard normal."""
    if not 0 < alpha <= 1:
        raise DomainError(f"alpha must lie in (0, 1], got {alpha}")
    return float(special.ndtri(1.0 - alpha / 2.0))


def project_params(fit: EpdFit) -> tuple[EpdParams, bool]:
    """Move ``(gamma_hat, delta_hat, tau_hat)`` into the admissible EPD set.

    Only ``delta`` is projected (clamped just above ``max(-1, 1/tau)``).
    A nonpositive ``gamma_hat`` cannot be repaired and raises.
    """
    if not fit.gamma_hat > 0:
        raise EstimationError(f"gamma_hat = {fit.gamma_hat} is not positive; EPD tail undefined")
    if not fit.tau_hat < 0:
        raise EstimationError(f"tau_hat = {fit.tau_hat} is not negative")
    bound = EpdParams.delta_lower_bound(fit.tau_hat) + PROJECTION_MARGIN
    projected = not fit.delta_hat > bound
    delta = bound if projected else fit.delta_hat
    return EpdParams(fit.gamma_hat, delta, fit.tau_hat), projected


def _check_counts(k, n):
    if not 1 <= k <= n - 1:
        raise ArgumentError(f"need 1 <= k <= n-1, got k={k}, n={n}")


def tail_prob_epd(fit: EpdFit, n: int, x: float, *, alpha: float | None = None) -> TailEstimate:
    """``(k/n) * Gbar(x / X_{n-k:n})`` with the fitted EPD.

    With ``alpha`` given, the asymptotic ``1 - alpha`` interval is attached
    (it needs ``fit.rho_hat``).
    """
    k = fit.k
    _check_counts(k, n)
    if not x > fit.threshold:
        raise DomainError(
            f"x = {x} must exceed the threshold {fit.threshold}; use the empirical distribution below it"
        )
    params, projected = project_params(fit)
    p_hat = (k / n) * math.exp(epd_logsf(params, x / fit.threshold))
    q_hat = n * p_hat / k
    ci_low = ci_high = None
    floored = False
    if alpha is not None:
        raw_low, ci_high = _ci_tail_prob_raw(p_hat, q_hat, fit.rho_hat, k, alpha)
        floored = raw_low < 0
        ci_low = max(raw_low, 0.0)
    return TailEstimate(p_hat, q_hat, "epd", k, n, float(x), ci_low, ci_high, projected, floored)


def tail_prob_weissman(gamma_hat: float, k: int, n: int, threshold: float, x: float) -> TailEstimate:
    """Pareto extrapolation ``(k/n) (x / threshold) ** (-1/gamma_hat)``."""
    _check_counts(k, n)
    if not gamma_hat > 0:
        raise ArgumentError(f"gamma_hat must be positive, got {gamma_hat}")
    if x < threshold:
        raise DomainError(f"x = {x} lies below the threshold {threshold}")
    # same operation order as the EPD survival at delta = 0
    p_hat = (k / n) * math.exp(-math.log(x / threshold) / gamma_hat)
    return TailEstimate(p_hat, n * p_hat / k, "weissman", k, n, float(x))


def tail_prob_gpd(fit: GpdFit, n: int, x: float) -> TailEstimate:
    """POT estimate ``(k/n) (1 + gamma (x - u) / sigma) ** (-1/gamma)``."""
    k = fit.k
    _check_counts(k, n)
    if x < fit.threshold:
        raise DomainError(f"x = {x} lies below the threshold {fit.threshold}")
    z = (x - fit.threshold) / fit.sigma_hat
    g = fit.gamma_hat
    if g == 0:
        sf = math.exp(-z)
    else:
        arg = 1.0 + g * z
        sf = 0.0 if arg <= 0 else math.exp(-math.log(arg) / g)
    p_hat = (k / n) * sf
    return TailEstimate(p_hat, n * p_hat / k, "gpd", k, n, float(x))


def extreme_quantile(fit: EpdFit, n: int, p: float) -> float:
    """Level ``x`` above the threshold whose estimated exceedance probability is ``p``."""
    k = fit.k
    _check_counts(k, n)
    if not 0 < p < k / n:
        raise DomainError(f"p must lie in (0, k/n) = (0, {k / n}), got {p}")
    params, _ = project_params(fit)
    return fit.threshold * epd_isf(params, n * p / k)


def ci_gamma(gamma_hat: float, rho_hat: float, k: int, alpha: float) -> Interval:
    """Asymptotic ``1 - alpha`` interval for ``gamma`` around the EPD estimate.

    >>> lo, hi = ci_gamma(0.3, -1.0, 100, 0.10)
    >>> round(lo, 5), round(hi, 5)
    (0.20131, 0.39869)
    """
    if k < 1:
        raise ArgumentError(f"k must be >= 1, got {k}")
    if not rho_hat < 0:
        raise ArgumentError(f"rho_hat must be negative, got {rho_hat}")
    half = abs(gamma_hat * (1 - rho_hat) / rho_hat) * normal_upper_quantile(alpha) / math.sqrt(k)
    return Interval(gamma_hat - half, gamma_hat + half)


def asymp_var_tailprob(q, rho: float):
    """Asymptotic variance of ``sqrt(k) (p_hat / p - 1)`` for the EPD estimator.

    ``q`` is the limit of ``n p / k`` in ``(0, 1]``; the value is 1 at
    ``q = 1`` and grows as ``q`` decreases.
    """
    q_arr = np.asarray(q, dtype=float)
    if np.any(~((q_arr > 0) & (q_arr <= 1))):
        raise DomainError("q must lie in (0, 1]")
    if not rho < 0:
        raise ArgumentError(f"rho must be negative, got {rho}")
    lq = np.log(q_arr)
    b = -np.expm1(-rho * lq) / rho  # (1 - q**-rho) / rho
    r2 = rho * rho
    out = (
        lq**2 * (1 - rho) ** 2 / r2
        + b**2 * (1 - 2 * rho) * (1 - rho) ** 2 / r2
        - 2 * lq * b * (1 - 2 * rho) * (1 - rho) / r2
        + 1.0
    )
    return float(out) if q_arr.ndim == 0 else out


def _ci_tail_prob_raw(p_hat, q_hat, rho_hat, k, alpha):
    if q_hat > 1:
        raise DomainError(f"q_hat = {q_hat} > 1: x lies below the threshold regime")
    half = math.sqrt(asymp_var_tailprob(q_hat, rho_hat)) * normal_upper_quantile(alpha) / math.sqrt(k)
    return p_hat * (1 - half), p_hat * (1 + half)


def ci_tail_prob(p_hat: float, q_hat: float, rho_hat: float, k: int, alpha: float) -> Interval:
    """Asymptotic ``1 - alpha`` interval for a tail probability; lower end floored at 0."""
    low, high = _ci_tail_prob_raw(p_hat, q_hat, rho_hat, k, alpha)
    return Interval(max(low, 0.0), high)

"""Threshold estimators built on the top ``k`` order statistics.

All estimators take the ``k`` largest observations of a sample and work with
relative excesses ``X_{n-k+i:n} / X_{n-k:n}`` over the random threshold
``X_{n-k:n}`` (the ``(k+1)``-th largest value). Everything except the GPD
fit is therefore invariant under rescaling of the data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Literal, Sequence, Union

import numpy as np
from scipy import optimize

from ._errors import (
    ArgumentError,
    ConvergenceError,
    DegenerateSampleError,
    DomainError,
    EstimationError,
    SingularSystemError,
)

__all__ = [
    "SortedSample",
    "as_sorted",
    "EpdFit",
    "GpdFit",
    "hill",
    "hill_path",
    "moment_fn",
    "epd_estimates_from_stats",
    "fit_epd",
    "fit_epd_score",
    "estimate_rho",
    "default_k_rho",
    "resolve_rho",
    "fit_gpd_mle",
]

RhoMode = Union[float, Literal["estimated"]]


class SortedSample:
    """Ascending order statistics ``X_{1:n} <= ... <= X_{n:n}`` of positive data."""

    def __init__(self, values, *, presorted: bool = False):
        x = np.array(values, dtype=float).ravel()
        if x.size and not np.all(np.isfinite(x)):
            raise DomainError("sample contains non-finite values")
        if x.size and x.min() <= 0:
            raise DomainError("all observations must be positive")
        if not presorted:
            x.sort()
        x.flags.writeable = False
        self.order_stats = x

    @property
    def n(self) -> int:
        return self.order_stats.size

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"SortedSample(n={self.n})"

    @cached_property
    def logs(self) -> np.ndarray:
        out = np.log(self.order_stats)
        out.flags.writeable = False
        return out

    @cached_property
    def _top_log_cumsum(self) -> np.ndarray:
        # entry j = sum of the j+1 largest log values
        return np.cumsum(self.logs[::-1])

    def threshold(self, k: int) -> float:
        """``X_{n-k:n}``."""
        _check_k(self, k)
        return float(self.order_stats[self.n - k - 1])

    def top(self, k: int) -> np.ndarray:
        """``X_{n-k+1:n}, ..., X_{n:n}``."""
        _check_k(self, k)
        return self.order_stats[self.n - k :]

    def log_excesses(self, k: int) -> np.ndarray:
        """``log(X_{n-k+i:n} / X_{n-k:n})`` for ``i = 1..k``."""
        _check_k(self, k)
        return self.logs[self.n - k :] - self.logs[self.n - k - 1]


def as_sorted(data) -> SortedSample:
    return data if isinstance(data, SortedSample) else SortedSample(data)


def _check_k(s: SortedSample, k) -> None:
    if isinstance(k, bool) or int(k) != k:
        raise ArgumentError(f"k must be an integer, got {k!r}")
    if not 1 <= k <= s.n - 1:
        raise ArgumentError(f"k must satisfy 1 <= k <= n-1 = {s.n - 1}, got {k}")


@dataclass(frozen=True)
class EpdFit:
    """EPD parameter estimates at the threshold ``X_{n-k:n}``."""

    gamma_hat: float
    delta_hat: float
    tau_hat: float
    rho_hat: float
    k: int
    threshold: float
    method: Literal["simplified", "score"]
    hill: float


@dataclass(frozen=True)
class GpdFit:
    """Maximum likelihood GPD fit to the excesses over ``X_{n-k:n}``."""

    gamma_hat: float
    sigma_hat: float
    k: int
    threshold: float
    loglik: float


# ---------------------------------------------------------------------------
# Basic statistics
# ---------------------------------------------------------------------------


def hill(s, k: int) -> float:
    """Hill estimator ``(1/k) sum log(X_{n-k+i:n} / X_{n-k:n})``.

    >>> round(hill([1, 2, 4, 8], 3), 7)
    1.3862944
    """
    s = as_sorted(s)
    return float(np.mean(s.log_excesses(k)))


def hill_path(s, ks: Sequence[int]) -> np.ndarray:
    """Hill estimates for several ``k`` at once (cumulative sums of log order stats)."""
    s = as_sorted(s)
    ks = np.asarray(ks, dtype=int)
    for k in ks:
        _check_k(s, int(k))
    top_sums = s._top_log_cumsum[ks - 1]
    return top_sums / ks - s.logs[s.n - ks - 1]


def moment_fn(s, k: int, t: float) -> float:
    """Mean of ``(X_{n-k+i:n} / X_{n-k:n}) ** t`` over the top ``k``, for ``t <= 0``."""
    if t > 0:
        raise ArgumentError(f"moment exponent must be <= 0, got {t}")
    s = as_sorted(s)
    if t == 0:
        _check_k(s, k)
        return 1.0
    return float(np.mean(np.exp(t * s.log_excesses(k))))


# ---------------------------------------------------------------------------
# EPD estimators
# ---------------------------------------------------------------------------


def epd_estimates_from_stats(H: float, E_tau: float, rho: float) -> tuple[float, float]:
    """Simplified EPD estimators from the Hill value and the moment statistic.

    Parameters
    ----------
    H : float
        Hill estimate at the threshold.
    E_tau : float
        Mean of relative excesses raised to ``tau = rho / H``.
    rho : float
        Negative second-order parameter (estimated or fixed).

    Returns
    -------
    gamma_hat, delta_hat
    """
    delta = H * (1 - 2 * rho) * (1 - rho) ** 3 / rho**4 * (E_tau - 1 / (1 - rho))
    gamma = H - delta * rho / (1 - rho)
    return gamma, delta


def fit_epd(s, k: int, rho_hat: float) -> EpdFit:
    """Fit the EPD at threshold ``X_{n-k:n}`` with the simplified estimators.

    ``tau`` is estimated as ``rho_hat / H`` with ``H`` the Hill estimate at
    the same ``k``. Estimates are returned raw and may fall outside the
    admissible parameter set.
    """
    s = as_sorted(s)
    if not rho_hat < 0:
        raise ArgumentError(f"rho_hat must be negative, got {rho_hat}")
    H = hill(s, k)
    if H <= 0:
        raise DegenerateSampleError(f"Hill estimate is {H} at k={k}; the top k values are tied")
    tau_hat = rho_hat / H
    E_tau = moment_fn(s, k, tau_hat)
    gamma_hat, delta_hat = epd_estimates_from_stats(H, E_tau, rho_hat)
    return EpdFit(
        gamma_hat=gamma_hat,
        delta_hat=delta_hat,
        tau_hat=tau_hat,
        rho_hat=rho_hat,
        k=int(k),
        threshold=s.threshold(k),
        method="simplified",
        hill=H,
    )


def fit_epd_score(
    s,
    k: int,
    tau: float,
    *,
    denominator: Literal["hill", "coupled"] = "hill",
) -> EpdFit:
    """Solve the linearized score equations for a known ``tau``.

    Writing ``E1 = E(tau)``, ``E2 = E(2 tau)`` and ``H`` for the Hill value,

        gamma = H + delta (1 - E1)
        delta = {(H tau - 1) E1 + 1} / D(gamma)

    where the denominator ``D`` is affine in ``gamma``.

    ``denominator="hill"`` evaluates ``D`` at ``gamma = H``; the difference
    to the exact solution is of smaller order than the sampling error.
    ``denominator="coupled"`` solves the pair exactly: eliminating
    ``delta`` leaves a quadratic in ``gamma`` whose root branch through
    ``H`` is taken. That quadratic has no real root for a sizeable share
    of samples, in which case :class:`ConvergenceError` is raised.
    """
    s = as_sorted(s)
    if not tau < 0:
        raise ArgumentError(f"tau must be negative, got {tau}")
    if denominator not in ("hill", "coupled"):
        raise ArgumentError(f"denominator must be 'hill' or 'coupled', got {denominator!r}")
    H = hill(s, k)
    if H <= 0:
        raise DegenerateSampleError(f"Hill estimate is {H} at k={k}; the top k values are tied")
    E1 = moment_fn(s, k, tau)
    E2 = moment_fn(s, k, 2 * tau)
    numerator = (H * tau - 1) * E1 + 1

    def D(g):
        return 1 - 2 * (1 - g * tau) * E1 + (1 - 2 * g * tau - g * tau**2) * E2 - tau * (1 - E1) * E1

    D_hill = D(H)
    if abs(D_hill) < 1e-12:
        raise SingularSystemError(f"score system is singular at k={k} (D={D_hill:.3g})")
    if denominator == "hill":
        delta = numerator / D_hill
        gamma = H + delta * (1 - E1)
    else:
        # (gamma - H) D(gamma) = numerator (1 - E1), D(gamma) = D(H) + slope (gamma - H)
        slope = 2 * tau * E1 - tau * (2 + tau) * E2
        K = numerator * (1 - E1)
        disc = D_hill**2 + 4 * slope * K
        if disc < 0:
            raise ConvergenceError(f"linearized score equations have no real solution at k={k}")
        u = 2 * K / (D_hill + math.copysign(math.sqrt(disc), D_hill))
        gamma = H + u
        D_gamma = D(gamma)
        if abs(D_gamma) < 1e-12:
            raise SingularSystemError(f"score system is singular at k={k} (D={D_gamma:.3g})")
        delta = numerator / D_gamma

    return EpdFit(
        gamma_hat=gamma,
        delta_hat=delta,
        tau_hat=float(tau),
        rho_hat=gamma * tau,
        k=int(k),
        threshold=s.threshold(k),
        method="score",
        hill=H,
    )


# ---------------------------------------------------------------------------
# Second-order parameter
# ---------------------------------------------------------------------------

RHO_BOUNDS = (-20.0, -0.05)


def default_k_rho(n: int) -> int:
    return min(n - 1, int(math.floor(n**0.995)))


def estimate_rho(s, k_rho: int | None = None, tuning: float = 0.0) -> float:
    """Estimate ``rho`` from the log-excess moments ``M1, M2, M3`` at ``k_rho``.

    Uses the ratio

        T = (M1**t - (M2/2)**(t/2)) / ((M2/2)**(t/2) - (M3/6)**(t/3))

    (logarithms replace powers when ``t = 0``), whose limit
    ``3(1 - rho)/(3 - rho)`` is monotone in ``rho``; inverting gives
    ``rho_hat = -|3(T - 1)/(T - 3)|``, clamped to ``[-20, -0.05]``.
    ``tuning = 0`` suits ``rho >= -1``, ``tuning = 1`` steeper tails.
    """
    s = as_sorted(s)
    if k_rho is None:
        k_rho = default_k_rho(s.n)
    L = s.log_excesses(k_rho)
    M1 = np.mean(L)
    M2 = np.mean(L**2) / 2.0
    M3 = np.mean(L**3) / 6.0
    if not (M1 > 0 and M2 > 0 and M3 > 0):
        raise EstimationError("log-excess moments vanish; cannot estimate rho")
    with np.errstate(all="ignore"):
        if tuning == 0:
            num = math.log(M1) - math.log(M2) / 2
            den = math.log(M2) / 2 - math.log(M3) / 3
        else:
            num = M1**tuning - M2 ** (tuning / 2)
            den = M2 ** (tuning / 2) - M3 ** (tuning / 3)
    if den == 0 or not math.isfinite(num / den):
        raise EstimationError("rho statistic T is undefined (zero denominator)")
    T = num / den
    if T == 3:
        raise EstimationError("rho statistic T equals 3; rho estimate is infinite")
    rho = -abs(3 * (T - 1) / (T - 3))
    return float(min(max(rho, RHO_BOUNDS[0]), RHO_BOUNDS[1]))


def resolve_rho(s, rho_mode: RhoMode = "estimated", **kwargs) -> float:
    """Return ``rho_mode`` itself when numeric, otherwise estimate ``rho`` from ``s``."""
    if isinstance(rho_mode, str):
        if rho_mode != "estimated":
            raise ArgumentError(f"rho_mode must be 'estimated' or a negative number, got {rho_mode!r}")
        return estimate_rho(s, **kwargs)
    rho = float(rho_mode)
    if not rho < 0:
        raise ArgumentError(f"fixed rho must be negative, got {rho}")
    return rho


# ---------------------------------------------------------------------------
# GPD maximum likelihood
# ---------------------------------------------------------------------------

GPD_GAMMA_RANGE = (-0.45, 10.0)
_GPD_GRID = 48


def _profile(theta: float, x: np.ndarray) -> tuple[float, float]:
    """Profile log-likelihood per excess at ``theta = gamma / sigma``, and ``gamma(theta)``."""
    if theta == 0.0:
        return -math.log(np.mean(x)) - 1.0, 0.0
    g = float(np.mean(np.log1p(theta * x)))
    return -math.log(g / theta) - g - 1.0, g


def fit_gpd_mle(s, k: int) -> GpdFit:
    """Fit a GPD by maximum likelihood to ``X_{n-k+i:n} - X_{n-k:n}``.

    For fixed ``theta = gamma / sigma`` the likelihood is maximized by
    ``gamma(theta) = mean(log(1 + theta x))``, which leaves a one-dimensional
    profile in ``theta``. ``gamma(theta)`` is increasing, so restricting
    ``gamma`` to ``[-0.45, 10]`` is a bracket on ``theta``. The profile is
    scanned on a grid in ``log(1 + theta max(x))`` and refined with a bounded
    Brent search around the best grid point.
    """
    s = as_sorted(s)
    _check_k(s, k)
    if k < 2:
        raise ArgumentError("GPD fit needs k >= 2")
    u = s.threshold(k)
    excess = s.top(k) - u
    scale = float(excess.mean())
    if not scale > 0 or excess.max() == excess.min():
        raise DegenerateSampleError(f"excesses over the threshold are all equal at k={k}")
    x = excess / scale
    xmax = float(x.max())

    def gamma_of(theta):
        return float(np.mean(np.log1p(theta * x)))

    g_lo, g_hi = GPD_GAMMA_RANGE
    theta_min = -1.0 / xmax
    left = theta_min * (1 - 1e-9)
    if gamma_of(left) >= g_lo:
        # a single largest excess cannot pull gamma(theta) down to the bound
        theta_lo = left
    else:
        theta_lo = optimize.brentq(lambda t: gamma_of(t) - g_lo, left, 0.0, xtol=1e-14)
    right = 1.0
    while gamma_of(right) < g_hi:
        right *= 4.0
    theta_hi = optimize.brentq(lambda t: gamma_of(t) - g_hi, 0.0, right, rtol=1e-12)

    # grid in zeta = log(1 + theta xmax): spreads both sides of theta = 0 evenly
    z_lo, z_hi = math.log1p(theta_lo * xmax), math.log1p(theta_hi * xmax)
    z_grid = np.linspace(z_lo, z_hi, _GPD_GRID)
    th_grid = np.expm1(z_grid) / xmax
    with np.errstate(divide="ignore", invalid="ignore"):
        g_grid = np.log1p(np.outer(th_grid, x)).mean(axis=1)
        prof = -np.log(g_grid / th_grid) - g_grid - 1.0
    zero = th_grid == 0.0
    prof[zero] = -1.0  # mean(x) == 1 after scaling
    prof[~np.isfinite(prof)] = -np.inf
    if np.ptp(prof[np.isfinite(prof)]) < 1e-13:
        raise ConvergenceError(f"GPD profile likelihood is flat at k={k}")

    i = int(np.argmax(prof))
    a = z_grid[max(i - 1, 0)]
    b = z_grid[min(i + 1, _GPD_GRID - 1)]

    def negprof(z):
        return -_profile(math.expm1(z) / xmax, x)[0]

    res = optimize.minimize_scalar(negprof, bounds=(a, b), method="bounded", options={"xatol": 1e-10})
    if not res.success and not np.isfinite(res.fun):
        raise ConvergenceError(f"GPD profile optimization failed at k={k}: {res.message}")
    z_best, f_best = (res.x, -res.fun) if -res.fun >= prof[i] else (z_grid[i], prof[i])
    theta = math.expm1(z_best) / xmax
    if theta == 0.0:
        gamma, sigma_scaled = 0.0, 1.0
    else:
        gamma = gamma_of(theta)
        sigma_scaled = gamma / theta
    if not (math.isfinite(gamma) and sigma_scaled > 0):
        raise ConvergenceError(f"GPD fit produced invalid parameters at k={k}")
    loglik = k * f_best - k * math.log(scale)
    return GpdFit(
        gamma_hat=gamma,
        sigma_hat=sigma_scaled * scale,
        k=int(k),
        threshold=u,
        loglik=float(loglik),
    )

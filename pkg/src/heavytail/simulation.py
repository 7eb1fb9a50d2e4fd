"""Monte Carlo comparison of tail index estimators and per-sample trajectories.

Replication ``r`` of a run draws its sample from an independent random stream
``SeedSequence(seed, spawn_key=(r,))``, so results do not depend on how the
replications are spread over worker processes: the per-replication
estimates are always reduced in replication order.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._errors import ArgumentError, DomainError, HeavyTailError, UnsupportedModelError
from .asymptotics import theory_overlay
from .distributions import ReferenceModel
from .estimators import (
    RhoMode,
    SortedSample,
    fit_epd,
    fit_gpd_mle,
    hill_path,
    resolve_rho,
)
from .tail_inference import (
    ci_gamma,
    tail_prob_epd,
    tail_prob_gpd,
    tail_prob_weissman,
)

__all__ = [
    "ESTIMATORS",
    "McConfig",
    "McSummary",
    "run_monte_carlo",
    "replication_rng",
    "TrajectoryTable",
    "TRAJECTORY_COLUMNS",
    "run_trajectory",
    "z_statistic",
    "RateCheck",
    "prop1_rate_check",
    "parse_k_grid",
]

ESTIMATORS = ("hill", "gpd", "epd")
FAILURE_WARN_FRACTION = 0.10


def parse_k_grid(text: str) -> tuple[int, ...]:
    """Parse ``"start:stop:step"`` (stop inclusive) or a comma list of integers."""
    text = text.strip()
    try:
        if ":" in text:
            parts = [int(p) for p in text.split(":")]
            if len(parts) != 3 or parts[2] <= 0:
                raise ValueError
            start, stop, step = parts
            grid = tuple(range(start, stop + 1, step))
        else:
            grid = tuple(int(p) for p in text.split(","))
    except ValueError:
        raise ArgumentError(f"k grid must look like 'start:stop:step' or 'k1,k2,...', got {text!r}") from None
    if not grid:
        raise ArgumentError(f"k grid {text!r} is empty")
    return grid


def replication_rng(seed: int, r: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(r,)))


def _default_workers() -> int:
    env = os.environ.get("HEAVYTAIL_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ArgumentError(f"HEAVYTAIL_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


@dataclass(frozen=True)
class McConfig:
    """Monte Carlo design: model, sample size, replications and threshold grid."""

    model: ReferenceModel
    n: int
    reps: int
    k_grid: tuple[int, ...]
    estimators: tuple[str, ...] = ESTIMATORS
    seed: int = 0
    rho_mode: RhoMode = "estimated"
    k_rho: int | None = None
    rho_tuning: float = 0.0
    workers: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "k_grid", tuple(int(k) for k in self.k_grid))
        object.__setattr__(self, "estimators", tuple(self.estimators))
        if self.reps < 1:
            raise ArgumentError(f"reps must be >= 1, got {self.reps}")
        if not self.k_grid:
            raise ArgumentError("k_grid is empty")
        if min(self.k_grid) < 1 or max(self.k_grid) > self.n - 1:
            raise ArgumentError(f"k_grid must lie in [1, n-1] = [1, {self.n - 1}]")
        if "gpd" in self.estimators and min(self.k_grid) < 2:
            raise ArgumentError("the GPD fit needs k >= 2")
        unknown = set(self.estimators) - set(ESTIMATORS)
        if unknown or not self.estimators:
            raise ArgumentError(f"estimators must be a nonempty subset of {ESTIMATORS}, got {self.estimators}")


@dataclass
class McSummary:
    """Per-estimator, per-``k`` bias, variance and MSE of the ``gamma`` estimates.

    Arrays are indexed ``[estimator, k]``. ``variance`` divides by the number
    of successful replications. The ``theory_*`` arrays are the asymptotic
    variance and mean of ``sqrt(k) (estimate - gamma)``.
    """

    config: McConfig
    true_gamma: float
    estimates: np.ndarray = field(repr=False)  # [rep, estimator, k]
    bias: np.ndarray = field(init=False)
    variance: np.ndarray = field(init=False)
    mse: np.ndarray = field(init=False)
    fail_count: np.ndarray = field(init=False)
    theory_var: np.ndarray = field(init=False)
    theory_bias: np.ndarray = field(init=False)

    def __post_init__(self):
        est = self.estimates
        ok = np.isfinite(est)
        self.fail_count = (~ok).sum(axis=0)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            mean = np.nanmean(est, axis=0)
            self.variance = np.nanvar(est, axis=0)
            self.mse = np.nanmean((est - self.true_gamma) ** 2, axis=0)
        self.bias = mean - self.true_gamma
        cfg = self.config
        shape = (len(cfg.estimators), len(cfg.k_grid))
        self.theory_var = np.full(shape, math.nan)
        self.theory_bias = np.full(shape, math.nan)
        for i, name in enumerate(cfg.estimators):
            for j, k in enumerate(cfg.k_grid):
                self.theory_var[i, j], self.theory_bias[i, j] = theory_overlay(cfg.model, name, cfg.n, k)

    @property
    def warn_flags(self) -> np.ndarray:
        return self.fail_count > FAILURE_WARN_FRACTION * self.config.reps

    def index(self, estimator: str, k: int) -> tuple[int, int]:
        return self.config.estimators.index(estimator), self.config.k_grid.index(k)

    def cell(self, estimator: str, k: int) -> dict:
        i, j = self.index(estimator, k)
        return {
            "estimator": estimator,
            "k": k,
            "bias": float(self.bias[i, j]),
            "variance": float(self.variance[i, j]),
            "mse": float(self.mse[i, j]),
            "fail_count": int(self.fail_count[i, j]),
            "theory_var": float(self.theory_var[i, j]),
            "theory_bias": float(self.theory_bias[i, j]),
        }

    def rows(self) -> list[dict]:
        return [self.cell(e, k) for e in self.config.estimators for k in self.config.k_grid]


def _resolve(s, rho_mode, k_rho, tuning) -> float:
    if isinstance(rho_mode, str):
        return resolve_rho(s, rho_mode, k_rho=k_rho, tuning=tuning)
    return resolve_rho(s, rho_mode)


def _replicate(cfg: McConfig, r: int) -> np.ndarray:
    """Estimates for one replication, NaN where an estimator failed."""
    out = np.full((len(cfg.estimators), len(cfg.k_grid)), np.nan)
    x = cfg.model.sample(replication_rng(cfg.seed, r), cfg.n)
    s = SortedSample(x)
    ks = np.asarray(cfg.k_grid)
    H = hill_path(s, ks)
    rho = None
    if "epd" in cfg.estimators:
        try:
            rho = _resolve(s, cfg.rho_mode, cfg.k_rho, cfg.rho_tuning)
        except HeavyTailError:
            rho = None
    for i, name in enumerate(cfg.estimators):
        for j, k in enumerate(cfg.k_grid):
            if name == "hill":
                out[i, j] = H[j]
            elif name == "epd":
                if rho is None:
                    continue
                try:
                    out[i, j] = fit_epd(s, k, rho).gamma_hat
                except HeavyTailError:
                    pass
            else:
                try:
                    out[i, j] = fit_gpd_mle(s, k).gamma_hat
                except HeavyTailError:
                    pass
    return out


def _replicate_chunk(args) -> np.ndarray:
    cfg, reps = args
    return np.stack([_replicate(cfg, r) for r in reps])


def run_monte_carlo(cfg: McConfig) -> McSummary:
    """Run ``cfg.reps`` replications and summarize bias, variance and MSE."""
    workers = cfg.workers if cfg.workers is not None else _default_workers()
    workers = max(1, min(workers, cfg.reps))
    if workers == 1:
        estimates = _replicate_chunk((cfg, range(cfg.reps)))
    else:
        bounds = np.linspace(0, cfg.reps, 4 * workers + 1).astype(int)
        chunks = [(cfg, range(a, b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            estimates = np.concatenate(list(pool.map(_replicate_chunk, chunks)))
    summary = McSummary(cfg, cfg.model.true_gamma, estimates)
    if summary.warn_flags.any():
        bad = [
            f"{cfg.estimators[i]}@k={cfg.k_grid[j]}" for i, j in zip(*np.nonzero(summary.warn_flags))
        ]
        warnings.warn(f"more than 10% failed replications for {', '.join(bad)}", RuntimeWarning)
    return summary


# ---------------------------------------------------------------------------
# Trajectories for a single data set
# ---------------------------------------------------------------------------

TRAJECTORY_COLUMNS = (
    "k",
    "threshold",
    "gamma_hill",
    "gamma_gpd",
    "gamma_epd",
    "delta_epd",
    "rho_hat",
    "gamma_ci_lo",
    "gamma_ci_hi",
    "p_weissman",
    "p_gpd",
    "p_epd",
    "p_ci_lo",
    "p_ci_hi",
)


@dataclass
class TrajectoryTable:
    """Estimates as a function of ``k``; one array per column of ``TRAJECTORY_COLUMNS``."""

    columns: dict[str, np.ndarray]
    x_star: float
    n: int
    alpha: float

    def __getitem__(self, name: str) -> np.ndarray:
        return self.columns[name]

    def __len__(self) -> int:
        return len(self.columns["k"])

    def rows(self) -> list[tuple]:
        cols = [self.columns[c] for c in TRAJECTORY_COLUMNS]
        return [tuple(c[i] for c in cols) for i in range(len(self))]


def run_trajectory(
    data,
    k_grid: Sequence[int],
    x_star: float,
    rho_mode: RhoMode = "estimated",
    *,
    alpha: float = 0.10,
    k_rho: int | None = None,
    rho_tuning: float = 0.0,
) -> TrajectoryTable:
    """Hill, GPD and EPD estimates of ``gamma`` and of ``P(X > x_star)`` along ``k_grid``.

    ``rho`` is resolved once for the whole sample. Failures at a given ``k``
    leave NaN in the affected columns.
    """
    s = data if isinstance(data, SortedSample) else SortedSample(data)
    ks = [int(k) for k in k_grid]
    if not ks:
        raise ArgumentError("k_grid is empty")
    if min(ks) < 2 or max(ks) > s.n - 1:
        raise ArgumentError(f"k_grid must lie in [2, n-1] = [2, {s.n - 1}]")
    lowest = s.threshold(max(ks))
    if not x_star > lowest:
        raise DomainError(f"x_star = {x_star} must exceed the lowest threshold X_(n-k) = {lowest}")
    rho = _resolve(s, rho_mode, k_rho, rho_tuning)

    cols = {c: np.full(len(ks), np.nan) for c in TRAJECTORY_COLUMNS}
    cols["rho_hat"][:] = rho
    H = hill_path(s, ks)
    n = s.n
    for i, k in enumerate(ks):
        u = s.threshold(k)
        cols["k"][i] = k
        cols["threshold"][i] = u
        cols["gamma_hill"][i] = H[i]
        above = x_star > u
        try:
            gfit = fit_gpd_mle(s, k)
            cols["gamma_gpd"][i] = gfit.gamma_hat
            if above:
                cols["p_gpd"][i] = tail_prob_gpd(gfit, n, x_star).p_hat
        except HeavyTailError:
            pass
        if above and H[i] > 0:
            cols["p_weissman"][i] = tail_prob_weissman(H[i], k, n, u, x_star).p_hat
        try:
            efit = fit_epd(s, k, rho)
        except HeavyTailError:
            continue
        cols["gamma_epd"][i] = efit.gamma_hat
        cols["delta_epd"][i] = efit.delta_hat
        cols["gamma_ci_lo"][i], cols["gamma_ci_hi"][i] = ci_gamma(efit.gamma_hat, rho, k, alpha)
        if above:
            try:
                est = tail_prob_epd(efit, n, x_star, alpha=alpha)
            except HeavyTailError:
                continue
            cols["p_epd"][i] = est.p_hat
            cols["p_ci_lo"][i], cols["p_ci_hi"][i] = est.ci_low, est.ci_high
    cols["k"] = cols["k"].astype(int)
    return TrajectoryTable(cols, float(x_star), n, alpha)


# ---------------------------------------------------------------------------
# Oracle statistic and approximation-rate check
# ---------------------------------------------------------------------------


def z_statistic(model: ReferenceModel, s, k: int) -> float:
    """``sqrt(k) {n Fbar(X_{n-k:n}) / k - 1}`` using the model's true survival function."""
    s = s if isinstance(s, SortedSample) else SortedSample(s)
    u = s.threshold(k)
    return math.sqrt(k) * (s.n * float(model.sf(u)) / k - 1.0)


@dataclass(frozen=True)
class RateCheck:
    """Sup-distances between the excess law over ``u`` and its EPD / Pareto approximations.

    Both distances are divided by ``|delta(u)|``.
    """

    u: float
    delta_u: float
    epd_ratio: float
    pareto_ratio: float
    degenerate: bool = False


def prop1_rate_check(model: ReferenceModel, u_grid: Sequence[float], y_grid: Sequence[float]) -> list[RateCheck]:
    """Normalized approximation errors of relative excesses over each ``u``.

    With ``delta(u)`` from the model, the EPD error should vanish faster than
    ``|delta(u)|`` while the plain Pareto error stays of that order.
    """
    if model.true_tau is None:
        raise UnsupportedModelError(f"{model.kind} has no second-order parameter")
    gamma, tau = model.true_gamma, model.true_tau
    y = np.asarray(y_grid, dtype=float)
    if np.any(y < 1):
        raise DomainError("y grid must lie in [1, inf)")
    out = []
    for u in u_grid:
        d = float(model.delta(u))
        excess = model.sf(u * y) / model.sf(u)
        if d == 0.0:
            out.append(RateCheck(float(u), 0.0, 0.0, 0.0, degenerate=True))
            continue
        epd = (y * (1 + d - d * y**tau)) ** (-1 / gamma)
        par = y ** (-1 / gamma)
        out.append(
            RateCheck(
                float(u),
                d,
                float(np.max(np.abs(excess - epd)) / abs(d)),
                float(np.max(np.abs(excess - par)) / abs(d)),
            )
        )
    return out

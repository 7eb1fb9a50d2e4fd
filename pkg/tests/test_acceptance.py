"""Acceptance criteria 1-10 at their stated tolerances.

Each test tags itself with its criterion number; the terminal summary prints
one PASS/FAIL line per criterion (sub-checks are lettered). Monte Carlo runs
use seed 1 and the estimated second-order parameter throughout.
"""

import math

import numpy as np
import pytest
from oracles import epd_stats_loop, hill_loop, moment_loop, weissman_loop
from scipy import integrate, stats

from heavytail import (
    Burr,
    EpdParams,
    Frechet,
    McConfig,
    ParetoMixture,
    SortedSample,
    StudentT,
    asymp_var_tailprob,
    ci_gamma,
    egpd_cdf,
    egpd_sf,
    epd_cdf,
    epd_estimates_from_stats,
    epd_isf,
    epd_joint_covariance,
    epd_pdf,
    epd_quantile,
    epd_sample,
    epd_sf,
    estimate_rho,
    fit_epd,
    hill,
    hill_path,
    moment_fn,
    pareto,
    prop1_rate_check,
    replication_rng,
    run_monte_carlo,
    tail_prob_weissman,
    z_statistic,
)

pytestmark = [pytest.mark.acceptance]

SEED = 1
REPS = 2000

PARAM_GRID = [
    EpdParams(g, d, t) for g in (0.25, 0.5, 1.0, 2.0) for t in (-2.0, -1.0, -0.5) for d in (-0.4, 0.0, 0.5)
]
Y_GRID = np.geomspace(1.001, 1e8, 200)


@pytest.fixture
def tag(record_property):
    def _tag(criterion, title, **measured):
        record_property("criterion", criterion)
        record_property("title", title)
        for name, value in measured.items():
            record_property("measured", f"{name}={value:.4g}")

    return _tag


def kvar(summary, est, k):
    i, j = summary.index(est, k)
    return k * summary.variance[i, j]


def abs_bias(summary, est, k):
    i, j = summary.index(est, k)
    return abs(summary.bias[i, j])


@pytest.fixture(scope="module")
def student_t_run():
    cfg = McConfig(StudentT(4.0), 1000, REPS, (150, 200, 250, 300), seed=SEED)
    return run_monte_carlo(cfg)


@pytest.fixture(scope="module")
def frechet_run():
    return run_monte_carlo(McConfig(Frechet(1.0), 1000, REPS, (300,), estimators=("gpd", "epd"), seed=SEED))


@pytest.fixture(scope="module")
def mixture_run():
    return run_monte_carlo(McConfig(ParetoMixture(2.0, 2.0), 1000, REPS, (200, 300, 400), seed=SEED))


class TestCriterion1:
    def test_1a_epd_variance(self, student_t_run, tag):
        v = kvar(student_t_run, "epd", 200)
        tag("1a", "Student-t(4) k*Var(EPD) in [0.39, 0.73]", kvar=v)
        assert 0.39 <= v <= 0.73

    def test_1b_hill_variance(self, student_t_run, tag):
        # Expected to fail: see the decisions ledger. At n=1000, k=200 the
        # finite-sample variance of Hill sits near E[H]^2 / k ~ 0.14, twice
        # the band's upper edge; an independent numpy check agrees.
        v = kvar(student_t_run, "hill", 200)
        tag("1b", "Student-t(4) k*Var(Hill) in [0.044, 0.081]", kvar=v)
        assert 0.044 <= v <= 0.081

    def test_1c_gpd_variance(self, student_t_run, tag):
        v = kvar(student_t_run, "gpd", 200)
        tag("1c", "Student-t(4) k*Var(GPD) in [1.09, 2.03]", kvar=v)
        assert 1.09 <= v <= 2.03


def test_criterion_2(student_t_run, tag):
    ks = (150, 200, 250, 300)
    epd = [abs_bias(student_t_run, "epd", k) for k in ks]
    hl = [abs_bias(student_t_run, "hill", k) for k in ks]
    tag("2", "Student-t(4) |bias EPD| < |bias Hill| at k=150..300", max_epd=max(epd), min_hill=min(hl))
    assert all(e < h for e, h in zip(epd, hl))


def test_criterion_3(frechet_run, tag):
    ve, vg = kvar(frechet_run, "epd", 300), kvar(frechet_run, "gpd", 300)
    tag("3", "Frechet(1) k*Var EPD, GPD in [2.8, 5.2], ratio in [0.75, 1.33]", epd=ve, gpd=vg, ratio=ve / vg)
    assert 2.8 <= ve <= 5.2 and 2.8 <= vg <= 5.2
    assert 0.75 <= ve / vg <= 1.33


class TestCriterion4:
    KS = (200, 300, 400)

    def test_4a_epd_beats_hill(self, mixture_run, tag):
        # Expected to fail with the estimated rho: see the decisions ledger.
        epd = [abs_bias(mixture_run, "epd", k) for k in self.KS]
        hl = [abs_bias(mixture_run, "hill", k) for k in self.KS]
        tag("4a", "Pareto mixture |bias EPD| < |bias Hill| at k=200,300,400", max_epd=max(epd), min_hill=min(hl))
        assert all(e < h for e, h in zip(epd, hl))

    def test_4b_epd_beats_gpd(self, mixture_run, tag):
        # Expected to fail: the GPD MLE is close to unbiased here (ledger).
        epd = [abs_bias(mixture_run, "epd", k) for k in self.KS]
        gp = [abs_bias(mixture_run, "gpd", k) for k in self.KS]
        tag("4b", "Pareto mixture |bias EPD| < |bias GPD| at k=200,300,400", max_epd=max(epd), max_gpd=max(gp))
        assert all(e < g for e, g in zip(epd, gp))


def test_criterion_5(tag):
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(3, 21))
        x = np.exp(rng.exponential(0.8, n)) * rng.uniform(0.5, 2.0)
        s = SortedSample(x)
        for k in range(1, n):
            H = hill(s, k)
            worst = max(worst, abs(H - hill_loop(x, k)) / abs(H))
            t = -rng.uniform(0.05, 3.0)
            m = moment_fn(s, k, t)
            worst = max(worst, abs(m - moment_loop(x, k, t)) / abs(m))
            rho = -rng.uniform(0.1, 3.0)
            got = epd_estimates_from_stats(H, m, rho)
            want = epd_stats_loop(H, m, rho)
            worst = max(worst, *(abs(a - b) / max(abs(b), 1e-300) for a, b in zip(got, want)))
            u = s.threshold(k)
            xs = u * rng.uniform(1.0, 100.0)
            p = tail_prob_weissman(H, k, n, u, xs).p_hat
            worst = max(worst, abs(p - weissman_loop(H, k, n, u, xs)) / p)
    tag("5", "loop oracles agree to 1e-12 on 100 samples, n <= 20", max_rel_err=worst)
    assert worst <= 1e-12


class TestCriterion6:
    def test_6a_pdf_normalization(self, tag):
        worst = 0.0
        for p in PARAM_GRID:
            total, _ = integrate.quad(
                lambda t, p=p: epd_pdf(p, math.exp(t)) * math.exp(t), 1e-12, 700.0, limit=1000, epsabs=1e-10
            )
            worst = max(worst, abs(total + epd_sf(p, math.exp(700.0)) - 1.0))
        tag("6a", "EPD pdf integrates to 1 within 1e-6", max_err=worst)
        assert worst <= 1e-6

    def test_6b_quantile_of_cdf(self, tag):
        # Expected to fail: for y near 1e8 the cdf rounds to 1 - O(1e-16) in
        # float64, so no inverse can recover y to 1e-9. The survival-scale
        # round trip below carries the same identity at 3e-15.
        worst, worst_resolved = 0.0, 0.0
        for p in PARAM_GRID:
            c = epd_cdf(p, Y_GRID)
            with np.errstate(all="ignore"):
                back = np.array([_safe_quantile(p, v) for v in c])
            err = np.abs(back / Y_GRID - 1.0)
            worst = max(worst, float(np.max(err)))
            worst_resolved = max(worst_resolved, float(np.max(err[c < 1.0])))
        tag(
            "6b",
            "quantile(cdf(y)) = y within 1e-9 on y in [1.001, 1e8]",
            max_rel_err=worst,
            where_cdf_below_1=worst_resolved,
        )
        assert worst <= 1e-9

    def test_6b_survival_form(self, tag):
        worst = max(float(np.max(np.abs(epd_isf(p, epd_sf(p, Y_GRID)) / Y_GRID - 1.0))) for p in PARAM_GRID)
        tag("6b'", "isf(sf(y)) = y within 1e-9 on the same grid", max_rel_err=worst)
        assert worst <= 1e-9

    def test_6c_egpd_is_gpd(self, tag):
        x = np.geomspace(1e-4, 1e6, 300)
        worst = 0.0
        for g in (0.25, 0.5, 1.0, 2.0):
            for d in (-0.4, 0.0, 0.5):
                p, sigma = EpdParams(g, d, -1.0), g / (1 + d)
                worst = max(
                    worst,
                    float(np.max(np.abs(egpd_cdf(p, x) - stats.genpareto.cdf(x, g, scale=sigma)))),
                    float(np.max(np.abs(egpd_sf(p, x) - stats.genpareto.sf(x, g, scale=sigma)))),
                )
        tag("6c", "EGPD(tau=-1) equals GPD within 1e-12", max_abs_err=worst)
        assert worst <= 1e-12

    def test_6d_ks(self, tag):
        pvals = []
        for p in (EpdParams(1, 0, -1), EpdParams(0.5, 0.5, -1), EpdParams(2, -0.4, -0.5)):
            x = epd_sample(p, SEED, 100_000)
            pvals.append(stats.kstest(x, lambda y, p=p: epd_cdf(p, y)).pvalue)
        tag("6d", "KS test of epd_sample at alpha=0.01, m=1e5", min_pvalue=min(pvals))
        assert min(pvals) > 0.01


def _safe_quantile(p, c):
    # the cdf reaches exactly 1 in float64 well before y = 1e8; that is an
    # honest failure of the identity, recorded as an infinite error
    return epd_quantile(p, c) if c < 1.0 else math.inf


def test_criterion_7(tag):
    y = np.geomspace(1.0, 1e4, 201)
    out = prop1_rate_check(ParetoMixture(2.0, 2.0), [10.0, 100.0, 1000.0], y)
    R = [c.epd_ratio for c in out]
    base = [c.pareto_ratio / out[0].pareto_ratio for c in out]
    tag("7", "mixture R(u) decreasing, R(1000) < 0.1 R(10), baseline in [0.5, 1.5]", R10=R[0], R1000=R[2])
    assert R[0] > R[1] > R[2] and R[2] < 0.1 * R[0]
    assert all(0.5 <= b <= 1.5 for b in base)


def test_criterion_8(tag):
    lo, hi = ci_gamma(0.3, -1.0, 100, 0.10)
    tag("8", "sigma^2(1, rho) = 1, ci_gamma spot value, Sigma_11 = 0.5625", lo=lo, hi=hi)
    assert all(asymp_var_tailprob(1.0, r) == 1.0 for r in (-2.0, -1.0, -0.5))
    assert abs(lo - 0.20131) <= 1e-4 and abs(hi - 0.39869) <= 1e-4
    assert epd_joint_covariance(0.25, -0.5)[0, 0] == 0.5625


@pytest.fixture(scope="module")
def z_run():
    m, n, k = pareto(1.0), 2000, 400
    z, g = np.empty(REPS), np.empty(REPS)
    for r in range(REPS):
        s = SortedSample(m.sample(replication_rng(SEED, r), n))
        z[r] = z_statistic(m, s, k)
        g[r] = math.sqrt(k) * (fit_epd(s, k, estimate_rho(s)).gamma_hat - 1.0)
    return z, g


class TestCriterion9:
    def test_9a_variance(self, z_run, tag):
        # On the band edge by construction: the exact finite-n variance of Z
        # at n=2000, k=400 is n^2 (k+1)(n-k) / {k (n+1)^2 (n+2)} = 0.800, so
        # about half of all seeds land below 0.8. Seed 1 gives 0.753 (-1.9 SE).
        v = float(np.var(z_run[0]))
        tag("9a", "Pareto Var(Z) in [0.8, 1.2]", var=v)
        assert 0.8 <= v <= 1.2

    def test_9b_correlation(self, z_run, tag):
        c = float(np.corrcoef(*z_run)[0, 1])
        tag("9b", "|corr(Z, sqrt(k)(gamma_EPD - 1))| < 0.1", corr=c)
        assert abs(c) < 0.1


def test_criterion_10(tag):
    m, n = Burr(0.3, -1.0, 1.0), 371
    ks = np.arange(50, 301)
    wins = 0
    for r in range(100):
        s = SortedSample(m.sample(replication_rng(SEED, r), n))
        rho = estimate_rho(s)
        epd = np.array([fit_epd(s, int(k), rho).gamma_hat for k in ks])
        wins += np.std(epd) < np.std(hill_path(s, ks))
    tag("10", "Burr(0.3,-1) n=371: EPD trajectory steadier than Hill in >= 70%", share=wins / 100)
    assert wins >= 70

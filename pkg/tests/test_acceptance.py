"""Acceptance suite: one group of tests per criterion, summarized at the end of the run."""

import math
import time

import numpy as np
import pytest
from scipy import integrate

from reference_values import ESN_VARIANCES, EST3_VARIANCES, NS, SIM_MSE_EPS
from skewpower.asymptotics import (
    asymptotic_cov_esep,
    cramer_rao_report,
    est_det_closed_form,
    fisher_info,
    fisher_info_esep,
    fisher_info_est,
)
from skewpower.cli import fixture_path
from skewpower.distributions import cdf, central_moment, density, esep, esgt, esl, esn, est, sample
from skewpower.estimation import FitConfig, fit, ira_step
from skewpower.gof import ks_statistic
from skewpower.robustness import (
    breakdown_point,
    gross_error_sensitivity,
    iss,
    m_matrix,
    redescending_check,
    score_limits,
    scores,
)
from skewpower.simulation import SimPlan, run_plan

SEED = 20240101
PARAMS = ("theta", "sigma", "eps")


def criterion(number, title):
    return pytest.mark.criterion(number, title)


# 1 -------------------------------------------------------------------------

@criterion(1, "Gaussian-member asymptotic variance table, 36 values to 1e-5")
def test_c01_esn_variance_table():
    start = time.perf_counter()
    worst = 0.0
    for eps, cells in ESN_VARIANCES.items():
        for j, n in enumerate(NS):
            cov = asymptotic_cov_esep(esn(0, 1, eps), n)
            for i, name in enumerate(PARAMS):
                worst = max(worst, abs(cov[i, i] - cells[name][j]))
    elapsed = time.perf_counter() - start
    print(f"criterion 1: max abs error {worst:.2e}, {elapsed:.3f} s")
    assert worst <= 1e-5 and elapsed < 1.0


# 2 -------------------------------------------------------------------------

@criterion(2, "closed-form Gaussian-member determinant on a 20-point grid, 1e-10 relative")
def test_c02_esn_determinant():
    grid = [(s, e, n) for s, e, n in zip(np.geomspace(0.1, 20, 20), np.linspace(-0.95, 0.95, 20),
                                          [1, 3, 7, 10, 25, 30, 50, 64, 99, 100] * 2)]
    worst = 0.0
    for sigma, eps, n in grid:
        got = fisher_info_esep(esep(0, sigma, eps, 2.0), n).det
        want = 2 * n ** 3 * (3 * math.pi - 8) / (sigma ** 4 * math.pi * (1 - eps ** 2) ** 2)
        worst = max(worst, abs(got / want - 1))
    print(f"criterion 2: max relative error {worst:.2e} over {len(grid)} points")
    assert len(grid) == 20 and worst <= 1e-10


# 3 -------------------------------------------------------------------------

@criterion(3, "skew-t (nu=3) variance table from quadrature information, 0.5% relative")
def test_c03_est_variance_table():
    start = time.perf_counter()
    worst = 0.0
    for eps, cells in EST3_VARIANCES.items():
        acov = fisher_info_est(est(0, 1, eps, 3.0), 1, scale="variance").acov
        for j, n in enumerate(NS):
            for i, name in enumerate(("theta", "sigma2", "eps")):
                worst = max(worst, abs(acov[i, i] / n / cells[name][j] - 1))
    elapsed = time.perf_counter() - start
    print(f"criterion 3: max relative error {worst:.2e}, {elapsed:.2f} s")
    assert worst <= 5e-3 and elapsed < 30.0


# 4 -------------------------------------------------------------------------

@criterion(4, "skew-t determinant against its closed form, 0.1%")
@pytest.mark.parametrize("nu", [3.0, 5.0, 10.0])
@pytest.mark.parametrize("eps", [-0.8, -0.2, 0.0])
def test_c04_est_determinant(nu, eps):
    got = fisher_info_est(est(0, 1.0, eps, nu), 1, scale="variance").det
    assert got == pytest.approx(est_det_closed_form(nu, 1.0, eps, 1), rel=1e-3)


# 5 -------------------------------------------------------------------------

@criterion(5, "Gaussian reduction on 100 random datasets, 1e-10")
def test_c05_gaussian_reduction():
    rng = np.random.default_rng(SEED)
    frozen = FitConfig(freeze={"eps"})
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(5, 300))
        x = rng.normal(rng.uniform(-50, 50), rng.uniform(0.01, 20), n)
        res = fit(x, "esn", config=frozen)
        assert res.converged
        worst = max(worst, abs(res.theta - x.mean()) / (1 + abs(x.mean())),
                    abs(res.sigma ** 2 / x.var() - 1))
    print(f"criterion 5: max error {worst:.2e}")
    assert worst <= 1e-10


# 6 -------------------------------------------------------------------------

FIXED_POINT_CASES = [
    ("esn", {}, esn(0, 1, -0.5)),
    ("esl", {}, esl(0, 1, 0.3)),
    ("est", {"nu": 3.0}, est(0, 1, -0.8, 3.0)),
    ("est", {"nu": 10.0}, est(2, 0.5, 0.2, 10.0)),
    ("esep", {"alpha": 1.5}, esep(1, 2, 0.4, 1.5)),
    ("esep", {"alpha": 3.0}, esep(0, 1, -0.2, 3.0)),
    ("esep", {"alpha": 0.8}, esep(0, 1, -0.3, 0.8)),
    ("esgt", {"alpha": 1.5, "q": 2.0}, esgt(0, 1, 0.2, 1.5, 2.0)),
]


@criterion(6, "converged fits are fixed points of the update equations within 10*tol")
@pytest.mark.parametrize("family,shape,truth", FIXED_POINT_CASES, ids=lambda v: str(v))
def test_c06_fixed_point(family, shape, truth):
    tol = FitConfig().tol
    for seed in range(5):
        for n in (50, 500):
            x = sample(truth, n, seed).values
            res = fit(x, family, **shape)
            if not res.converged:
                continue
            nxt = np.array(ira_step(x, res.estimates, res.distribution))
            gap = np.max(np.abs(nxt - np.array(res.estimates)))
            assert gap <= 10 * tol, (seed, n, gap)


# 7 -------------------------------------------------------------------------

SAMPLER_CASES = [
    esep(0, 1, -0.5, 0.7), esep(1, 2, 0.3, 1.0), esep(0, 1, -0.2, 1.5), esep(-3, 0.5, 0.0, 2.0),
    esep(0, 1, 0.6, 2.0), esep(0, 1, -0.7, 3.0), esep(5, 3, 0.4, 4.0),
    est(0, 1, -0.3, 6.0), est(1, 2, 0.5, 10.0), est(0, 1, -0.8, 30.0),
    esgt(0, 1, 0.2, 2.0, 4.0), esgt(0, 1, -0.4, 1.5, 5.0),
]


@criterion(7, "sampler mean, variance and left mass within 3 Monte Carlo standard errors")
@pytest.mark.parametrize("d", SAMPLER_CASES, ids=lambda d: f"{d.label}-{d.eps}")
def test_c07_sampler(d):
    n = 100_000
    x = sample(d, n, SEED).values
    m1, m2, m3, m4 = (central_moment(d, r) for r in (1, 2, 3, 4))
    var = m2 - m1 ** 2
    mu4 = m4 - 4 * m3 * m1 + 6 * m2 * m1 ** 2 - 3 * m1 ** 4
    assert abs(x.mean() - (d.theta + m1)) < 3 * math.sqrt(var / n)
    assert abs(x.var() - var) < 3 * math.sqrt((mu4 - var ** 2) / n)
    p = (1 + d.eps) / 2
    assert abs(np.mean(x < d.theta) - p) < 3 * math.sqrt(p * (1 - p) / n)


# 8 -------------------------------------------------------------------------

def _simulate(case, eps):
    plan = SimPlan(case=case, eps0=eps, n_list=(30, 150), reps=1000, seed=SEED)
    start = time.perf_counter()
    small, large = run_plan(plan)
    elapsed = time.perf_counter() - start
    print(f"criterion 8 [{case}, eps={eps}]: n=150 mean {large.mean}, mse {large.mse}, "
          f"failures {small.failures}/{large.failures}, {elapsed:.0f} s")
    return small, large, elapsed


def _check_recovery(case, eps):
    small, large, elapsed = _simulate(case, eps)
    assert elapsed < 300
    for k in PARAMS:
        assert abs(large.mean[k] - large.truth[k]) <= 0.05, k
        assert large.mse[k] < small.mse[k], k
    return large


@criterion(8, "simulation recovery at (eps, n) = (-0.2, 150), reps=1000")
def test_c08_gaussian_case():
    large = _check_recovery("esn", -0.2)
    target = SIM_MSE_EPS[("esn", -0.2)]
    assert target / 2 <= large.mse["eps"] <= 2 * target
    assert 0.5 <= large.ratio["theta"] <= 2.0


@criterion(8, "simulation recovery at (eps, n) = (-0.2, 150), reps=1000")
@pytest.mark.xfail(strict=True, reason=(
    "reference Laplace-case MSE(eps) 0.0036 is below the Cramer-Rao bound for this design "
    "(about 0.0064); the simulated value stays near the bound"))
def test_c08_laplace_case():
    large = _check_recovery("esl", -0.2)
    target = SIM_MSE_EPS[("esl", -0.2)]
    assert target / 2 <= large.mse["eps"] <= 2 * target


@criterion(8, "simulation recovery at (eps, n) = (-0.2, 150), reps=1000")
@pytest.mark.parametrize("eps", [-0.2, -0.8])
def test_c08_student_case(eps):
    large = _check_recovery("est3", eps)
    target = SIM_MSE_EPS[("est3", eps)]
    assert target / 2 <= large.mse["eps"] <= 2 * target


# 9 -------------------------------------------------------------------------

@criterion(9, "robustness verdicts")
@pytest.mark.parametrize("alpha", [1.5, 2.0, 3.0])
def test_c09_power_family_divergent(alpha):
    d = esep(0, 1, 0.3, alpha)
    assert not gross_error_sensitivity(d).finite
    assert not iss(d).finite


@criterion(9, "robustness verdicts")
@pytest.mark.parametrize("nu", [3.0, 5.0])
@pytest.mark.parametrize("eps", [-0.5, 0.0, 0.4])
def test_c09_student_finite_and_stable(nu, eps):
    d = est(0, 1, eps, nu)
    for verdict in (gross_error_sensitivity(d), iss(d)):
        assert verdict.finite and len(verdict.sups) >= 4
        tail = np.array(verdict.sups[-4:])
        assert (tail.max() - tail.min()) / verdict.value < 0.01


LIMIT_CASES = ([est(0, 1, e, nu) for nu in (1.0, 3.0, 5.0) for e in (-0.8, -0.2, 0.0, 0.5)]
               + [esep(0, 1, e, a) for a in (0.4, 0.5, 1.0) for e in (-0.5, 0.0, 0.3)])


@criterion(9, "robustness verdicts")
@pytest.mark.parametrize("d", LIMIT_CASES, ids=lambda d: f"{d.label}-{d.eps}")
def test_c09_score_tail_limits(d):
    lim = score_limits(d)
    at_plus, at_minus = scores(d, 1e6), scores(d, -1e6)
    checked = 0
    for k in PARAMS:
        if lim[k].finite:
            assert float(getattr(at_plus, f"psi_{k}")) == pytest.approx(lim[k].plus, abs=1e-3)
            assert float(getattr(at_minus, f"psi_{k}")) == pytest.approx(lim[k].minus, abs=1e-3)
            checked += 1
        else:
            assert abs(float(getattr(at_plus, f"psi_{k}"))) > 10 or \
                abs(float(getattr(at_minus, f"psi_{k}"))) > 10
    assert checked >= 1


@criterion(9, "robustness verdicts")
@pytest.mark.parametrize("alpha", [0.6, 0.8, 0.9])
@pytest.mark.parametrize("eps", [-0.5, 0.3])
def test_c09_slow_location_decay(alpha, eps):
    # for 1/2 < alpha < 1 the zero limit is reached like |z|**(alpha-1), too slowly to
    # be within 1e-3 at |z| = 1e6; check the decay exponent instead
    d = esep(0, 1, eps, alpha)
    assert score_limits(d)["theta"].plus == 0.0 and score_limits(d)["theta"].minus == 0.0
    for sign in (1.0, -1.0):
        lo, hi = (abs(float(scores(d, sign * z).psi_theta)) for z in (1e6, 1e8))
        assert math.log(hi / lo) / math.log(100.0) == pytest.approx(alpha - 1, abs=1e-3)


@criterion(9, "robustness verdicts")
@pytest.mark.parametrize("nu", [1.0, 3.0, 5.0, 10.0])
@pytest.mark.parametrize("eps", [-0.8, -0.2, 0.0, 0.5])
def test_c09_redescending_root(nu, eps):
    d = est(0, 1, eps, nu)
    red = redescending_check(d)
    assert red.redescending
    assert red.x0_plus == pytest.approx(math.sqrt(nu) * (1 - eps), rel=1e-9)
    assert red.x0_minus == pytest.approx(-math.sqrt(nu) * (1 + eps), rel=1e-9)
    for root in (red.x0_plus, red.x0_minus):
        h = 1e-4 * abs(root)
        slope = [float((scores(d, x + h).psi_theta - scores(d, x - h).psi_theta) / (2 * h))
                 for x in (root - 10 * h, root + 10 * h)]
        assert slope[0] * slope[1] < 0


@criterion(9, "robustness verdicts")
@pytest.mark.parametrize("d,want", [
    (esep(0, 1, 0.2, 0.5), "half"), (esep(0, 1, -0.4, 0.8), "half"), (esl(0, 1, 0.3), "half"),
    (esep(0, 1, 0.2, 1.5), "not_established"), (esn(0, 1, -0.2), "not_established"),
    (esep(0, 1, 0.2, 3.0), "not_established"),
    (est(0, 1, -0.2, 1.0), "half"), (est(0, 1, 0.5, 3.0), "half"), (est(0, 1, 0.0, 30.0), "half"),
], ids=lambda v: v.label if hasattr(v, "label") else str(v))
def test_c09_breakdown(d, want):
    assert breakdown_point(d) == want


# 10 ------------------------------------------------------------------------

@criterion(10, "M-matrix equals per-observation Fisher information within 1e-4")
@pytest.mark.parametrize("d", [esep(0, 1, e, a) for a in (1.2, 1.5, 2.0, 3.0) for e in (-0.5, 0.0, 0.5)]
                         + [est(0, 1, e, nu) for nu in (3.0, 5.0, 10.0) for e in (-0.8, -0.2, 0.4)],
                         ids=lambda d: f"{d.label}-{d.eps}")
def test_c10_information_identity(d):
    np.testing.assert_allclose(m_matrix(d), fisher_info(d, 1).fisher, atol=1e-4, rtol=0)


# 11 ------------------------------------------------------------------------

CDF_CASES = ([esep(0, 1, e, a) for a in (0.6, 1.0, 2.0, 3.5) for e in (-0.7, 0.0, 0.5)]
             + [est(0, 1, e, nu) for nu in (1.0, 3.0, 10.0) for e in (-0.5, 0.3)]
             + [esgt(0.5, 2.0, 0.3, 1.5, 2.0), esgt(0, 1, -0.6, 3.0, 0.8)])


@criterion(11, "closed-form CDFs against quadrature; KS against a brute-force oracle")
@pytest.mark.parametrize("d", CDF_CASES, ids=lambda d: f"{d.label}-{d.eps}")
def test_c11_cdf_quadrature(d):
    xs = d.theta + d.sigma * np.linspace(-6, 6, 50)
    left = 0.5 * (1 + d.eps)
    for x in xs:
        if x < d.theta:
            want = integrate.quad(lambda t: density(d, t), -np.inf, x, epsabs=1e-13, epsrel=1e-12,
                                  limit=400)[0]
        else:
            want = left + integrate.quad(lambda t: density(d, t), d.theta, x, epsabs=1e-13,
                                         epsrel=1e-12, limit=400)[0]
        assert float(cdf(d, x)) == pytest.approx(want, abs=1e-8)


@criterion(11, "closed-form CDFs against quadrature; KS against a brute-force oracle")
@pytest.mark.parametrize("n", [5, 12, 30, 50])
def test_c11_ks_brute_force(n):
    for d in (esl(0, 1, 0.3), est(0, 2, -0.5, 3.0), esep(1, 1, 0.1, 0.7)):
        x = np.sort(sample(d, n, SEED + n).values)
        grid = np.concatenate([np.linspace(x[0] - 10 * d.sigma, x[-1] + 10 * d.sigma, 50_001),
                               x, np.nextafter(x, -np.inf)])
        emp = np.searchsorted(x, grid, side="right") / n
        brute = np.max(np.abs(emp - cdf(d, grid)))
        assert abs(ks_statistic(x, d) - brute) <= 1 / (2 * n)


# 12 ------------------------------------------------------------------------

@criterion(12, "synthetic fixture fit recovers truth within 3*sqrt(CRLB); matrix layout")
def test_c12_fixture_workflow():
    x = np.loadtxt(fixture_path(), skiprows=1)
    truth = esl(0.03, 0.07, 0.07)
    res = fit(x, "esl")
    assert res.converged and x.size == 1416
    bound = np.diag(fisher_info(truth, x.size, skew="parameter").acov)
    z = np.abs(np.array(res.estimates) - truth.params) / np.sqrt(bound)
    print(f"criterion 12: standardized errors {np.round(z, 3).tolist()}")
    assert np.all(z < 3)
    rows = cramer_rao_report(res).to_text().splitlines()[-3:]
    assert [len(r.split()) for r in rows] == [3, 2, 1]

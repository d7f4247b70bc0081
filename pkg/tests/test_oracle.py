"""Analytic Beta machinery, likelihood ratios, and first-order conditions."""

import math

import numpy as np
import pytest

import resmetrics as rm
from resmetrics import MODERATE, STRONG, MetricSpec

PRESETS = (MODERATE, STRONG)
ALPHAS = (0.1, 0.25, 0.5)


# ---------------------------------------------------------------------------
# beta pdf / cdf
# ---------------------------------------------------------------------------

def test_pdf_uniform():
    for t in np.linspace(0, 1, 11):
        assert rm.beta_pdf(1, 1, float(t)) == pytest.approx(1.0)


def test_cdf_closed_forms():
    for t in np.linspace(0, 1, 21):
        assert rm.beta_cdf(2, 1, float(t)) == pytest.approx(t * t, rel=1e-12, abs=1e-15)
    # binomial-sum identity: I_0.5(5,3) = sum_{k=5}^{7} C(7,k) 0.5^7 = 29/128
    assert rm.beta_cdf(5, 3, 0.5) == pytest.approx(0.2265625, rel=1e-12)


def test_cdf_bounds_and_monotone():
    for a, b in ((5, 3), (2, 8), (8, 2), (1, 12), (0.5, 0.5), (3.7, 0.2)):
        assert rm.beta_cdf(a, b, 0.0) == 0.0
        assert rm.beta_cdf(a, b, 1.0) == 1.0
        grid = np.linspace(0, 1, 200)
        vals = [rm.beta_cdf(a, b, float(t)) for t in grid]
        assert all(v2 >= v1 for v1, v2 in zip(vals, vals[1:]))
        assert all(rm.beta_pdf(a, b, float(t)) >= 0 for t in grid[1:-1])


def test_cdf_against_high_precision_reference():
    mpmath = pytest.importorskip("mpmath")
    mpmath.mp.dps = 40
    rng = np.random.default_rng(0)
    for _ in range(120):
        a = float(rng.uniform(0.1, 30))
        b = float(rng.uniform(0.1, 30))
        t = float(rng.uniform(0.001, 0.999))
        ref = float(mpmath.betainc(a, b, 0, t, regularized=True))
        got = rm.beta_cdf(a, b, t)
        assert got == pytest.approx(ref, rel=1e-10, abs=1e-300), (a, b, t)


def test_pdf_against_scipy():
    scipy_stats = pytest.importorskip("scipy.stats")
    rng = np.random.default_rng(1)
    for _ in range(50):
        a = float(rng.uniform(0.2, 20))
        b = float(rng.uniform(0.2, 20))
        t = float(rng.uniform(0.01, 0.99))
        assert rm.beta_pdf(a, b, t) == pytest.approx(
            float(scipy_stats.beta.pdf(t, a, b)), rel=1e-10
        )


def test_domain_errors():
    with pytest.raises(rm.DomainError):
        rm.beta_pdf(0, 1, 0.5)
    with pytest.raises(rm.DomainError):
        rm.beta_cdf(1, -1, 0.5)
    with pytest.raises(rm.DomainError):
        rm.beta_cdf(2, 3, 1.5)
    with pytest.raises(rm.DomainError):
        rm.likelihood_ratio(MODERATE, 0.0)


# ---------------------------------------------------------------------------
# likelihood ratio
# ---------------------------------------------------------------------------

def test_lr_identical_regimes_is_one():
    same = rm.BetaRegime(4, 6, 4, 6)
    for t in np.linspace(0.05, 0.95, 19):
        assert rm.likelihood_ratio(same, float(t)) == pytest.approx(1.0, rel=1e-12)


def test_lr_moderate_value_at_half():
    # direct density evaluation: 105 * 0.5^6 / (72 * 0.5^8) = 35/6
    assert rm.likelihood_ratio(MODERATE, 0.5) == pytest.approx(35 / 6, rel=1e-12)


def test_lr_monotone_both_presets():
    grid = np.linspace(1e-3, 1 - 1e-3, 1000)
    for regime in PRESETS:
        vals = np.array([rm.likelihood_ratio(regime, float(t)) for t in grid])
        assert (np.diff(vals) > 0).all(), regime.name


def test_lr_extreme_tails_finite():
    # log-space evaluation keeps the strong regime finite deep in the tails
    assert rm.likelihood_ratio(STRONG, 1e-12) >= 0.0
    assert math.isfinite(rm.likelihood_ratio(STRONG, 1e-12))
    assert rm.likelihood_ratio(STRONG, 1 - 1e-13) > 1e10


# ---------------------------------------------------------------------------
# gradient check: d/d delta of analytic TPR equals -f1
# ---------------------------------------------------------------------------

def test_rate_gradients_match_densities():
    h = 1e-6
    points = np.linspace(0.05, 0.95, 100)
    for regime in PRESETS:
        for t in points:
            t = float(t)
            num = (rm.oracle.analytic_tpr(regime, t + h) - rm.oracle.analytic_tpr(regime, t - h)) / (2 * h)
            den = -rm.beta_pdf(regime.a1, regime.b1, t)
            assert num == pytest.approx(den, rel=1e-4, abs=1e-9)
            num = (rm.oracle.analytic_fpr(regime, t + h) - rm.oracle.analytic_fpr(regime, t - h)) / (2 * h)
            den = -rm.beta_pdf(regime.a0, regime.b0, t)
            assert num == pytest.approx(den, rel=1e-4, abs=1e-9)


# ---------------------------------------------------------------------------
# first-order condition and root solving
# ---------------------------------------------------------------------------

def test_foc_residual_shape():
    r = rm.res_foc_residual(MODERATE, 0.3, 0.5)
    assert r.residual == r.lhs - r.rhs
    # rhs limit toward delta -> 0 is alpha
    r0 = rm.res_foc_residual(MODERATE, 1e-9, 0.37)
    assert r0.rhs == pytest.approx(0.37, rel=1e-6)


def test_foc_sign_change_moderate():
    lo = rm.res_foc_residual(MODERATE, 0.01, 0.5).residual
    hi = rm.res_foc_residual(MODERATE, 0.99, 0.5).residual
    assert lo < 0 < hi


def test_solve_interior_all_presets_alphas():
    for regime in PRESETS:
        for alpha in ALPHAS:
            root = rm.solve_interior_threshold(regime, alpha)
            assert 0.0 < root < 1.0
            assert abs(rm.res_foc_residual(regime, root, alpha).residual) <= 1e-8


def test_root_grid_resolution_invariance():
    for regime in PRESETS:
        r1 = rm.solve_interior_threshold(regime, 0.25, grid_points=256)
        r2 = rm.solve_interior_threshold(regime, 0.25, grid_points=2048)
        assert abs(r1 - r2) <= 1e-6


def test_moderate_alpha_010_near_table_mean():
    # large-sample mean threshold reported for the moderate regime at the
    # most conservative preference is 0.289
    root = rm.solve_interior_threshold(MODERATE, 0.10)
    assert abs(root - 0.289) <= 0.05


def test_no_root_bracket_identical_regimes():
    same = rm.BetaRegime(3, 3, 3, 3)
    with pytest.raises(rm.NoRootBracketError):
        rm.solve_interior_threshold(same, 0.5)


def test_oracle_vs_empirical_large_sample():
    # ties the sampler+path route to the analytic route
    for regime in PRESETS:
        plan = rm.plan_sample(1e-2, 10_000, 2_000_000)
        assert plan.w_neg == 1.0
        scores, labels, weights = rm.draw_regime_arrays(regime, plan, 314159)
        path = rm.build_path_arrays(scores, labels, weights)
        for alpha in ALPHAS:
            emp = rm.optimize(path, MetricSpec.res(alpha)).delta
            ana = rm.solve_interior_threshold(regime, alpha)
            assert abs(emp - ana) <= 0.02, (regime.name, alpha)


# ---------------------------------------------------------------------------
# F1 required likelihood ratio
# ---------------------------------------------------------------------------

def test_f1_required_lr_plugin():
    # pi=0.5 with tpr=fpr=1 (delta -> 0): (0.5/1) * 1 / (1 + 0.5) = 1/3
    val = rm.f1_required_lr(0.5, 1e-12, MODERATE)
    assert val == pytest.approx(1 / 3, rel=1e-6)


def test_f1_required_lr_grows_as_pi_halves():
    for delta in (0.2, 0.5, 0.8):
        prev = None
        for pi in (1e-2, 5e-3, 2.5e-3, 1.25e-3):
            cur = rm.f1_required_lr(pi, delta, MODERATE)
            if prev is not None:
                assert cur > prev
            prev = cur


def test_f1_required_lr_exceeds_lambda_in_tail():
    lam = rm.likelihood_ratio(MODERATE, 0.8)
    for pi in (1e-4, 1e-5, 1e-6):
        assert rm.f1_required_lr(pi, 0.8, MODERATE) > lam


# ---------------------------------------------------------------------------
# implied trade-off curves
# ---------------------------------------------------------------------------

def test_tradeoff_res_flat_f1_divergent():
    pis = (1e-2, 1e-3, 1e-4)
    res_curve = rm.implied_tradeoff_curve(
        MODERATE, MetricSpec.res(0.5), pis, sample_budget=10_000, seed=8, n_cap=200_000
    )
    lams = [p.lam for p in res_curve.points]
    assert all(math.isfinite(x) for x in lams)
    assert max(lams) / min(lams) <= 2.0
    assert not res_curve.degenerate_flat
    f1_curve = rm.implied_tradeoff_curve(
        MODERATE, MetricSpec.f1(), pis, sample_budget=10_000, seed=8, n_cap=200_000
    )
    by_pi = {p.pi: p.lam for p in f1_curve.points}
    assert by_pi[1e-4] / by_pi[1e-2] >= 10.0


def test_tradeoff_identical_regime_flat():
    same = rm.BetaRegime(4, 4, 4, 4)
    curve = rm.implied_tradeoff_curve(
        same, MetricSpec.res(0.5), (1e-2, 1e-3), sample_budget=500, seed=3, n_cap=50_000
    )
    assert curve.degenerate_flat


def test_student_t_p_against_scipy():
    scipy_stats = pytest.importorskip("scipy.stats")
    for t, df in ((0.5, 10), (2.1, 40), (-3.3, 198), (0.0, 5)):
        ref = 2 * float(scipy_stats.t.sf(abs(t), df))
        assert rm.oracle.student_t_two_sided_p(t, df) == pytest.approx(ref, rel=1e-10)

"""Analytic Beta densities/CDFs, likelihood ratios, and first-order conditions.

Everything here is closed-form or quadrature-free ground truth, independent of
the sampled threshold paths, so the two routes can be checked against each
other. Densities are evaluated in log space and exponentiated; the regularized
incomplete beta uses the continued-fraction expansion with log-gamma
normalization, targeting 1e-10 relative accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NoRootBracketError, SingularDensityError
from .metrics import MetricSpec, SENTINEL_INDEX, build_path_arrays, optimize
from .sampler import BetaRegime, N_CAP_DEFAULT, draw_regime_arrays, plan_sample

_CF_EPS = 1e-15
_CF_MAXIT = 500
_FPMIN = 1e-300


def _check_shapes(a: float, b: float):
    if not (a > 0.0 and b > 0.0) or not (math.isfinite(a) and math.isfinite(b)):
        raise DomainError(f"Beta shapes must be positive finite, got a={a}, b={b}")


def log_beta(a: float, b: float) -> float:
    _check_shapes(a, b)
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def beta_logpdf(a: float, b: float, t: float) -> float:
    _check_shapes(a, b)
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"t={t} outside [0, 1]")
    if t == 0.0:
        if a > 1.0:
            return -math.inf
        if a == 1.0:
            return -log_beta(a, b)
        return math.inf
    if t == 1.0:
        if b > 1.0:
            return -math.inf
        if b == 1.0:
            return -log_beta(a, b)
        return math.inf
    return (a - 1.0) * math.log(t) + (b - 1.0) * math.log1p(-t) - log_beta(a, b)


def beta_pdf(a: float, b: float, t: float) -> float:
    lp = beta_logpdf(a, b, t)
    if lp == math.inf:
        return math.inf
    return math.exp(lp)


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAXIT + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delt = d * c
        h *= delt
        if abs(delt - 1.0) < _CF_EPS:
            return h
    raise ArithmeticError(
        f"incomplete beta continued fraction failed to converge for a={a}, b={b}, x={x}"
    )


def beta_cdf(a: float, b: float, t: float) -> float:
    """Regularized incomplete beta I_t(a, b)."""
    _check_shapes(a, b)
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"t={t} outside [0, 1]")
    if t == 0.0:
        return 0.0
    if t == 1.0:
        return 1.0
    ln_bt = log_beta(a, b)
    bt = math.exp(a * math.log(t) + b * math.log1p(-t) - ln_bt)
    if t < (a + 1.0) / (a + b + 2.0):
        return bt * _betacf(a, b, t) / a
    return 1.0 - bt * _betacf(b, a, 1.0 - t) / b


def beta_sf(a: float, b: float, t: float) -> float:
    """Survival function 1 - I_t(a, b), evaluated via the mirrored CDF to keep
    relative accuracy in the upper tail."""
    return beta_cdf(b, a, 1.0 - t)


def student_t_two_sided_p(t_stat: float, df: float) -> float:
    """Two-sided Student-t p-value via the regularized incomplete beta."""
    if df <= 0:
        raise DomainError("df must be positive")
    x = df / (df + t_stat * t_stat)
    return beta_cdf(0.5 * df, 0.5, x)


def analytic_tpr(regime: BetaRegime, delta: float) -> float:
    return beta_sf(regime.a1, regime.b1, delta)


def analytic_fpr(regime: BetaRegime, delta: float) -> float:
    return beta_sf(regime.a0, regime.b0, delta)


def likelihood_ratio(regime: BetaRegime, t: float) -> float:
    """Lambda(t) = f1(t) / f0(t), computed as exp(log f1 - log f0)."""
    if not 0.0 < t < 1.0:
        raise DomainError(f"t={t} outside (0, 1)")
    lf1 = beta_logpdf(regime.a1, regime.b1, t)
    lf0 = beta_logpdf(regime.a0, regime.b0, t)
    if lf0 == -math.inf:
        raise SingularDensityError(f"negative-class density vanishes at t={t}")
    return math.exp(lf1 - lf0)


@dataclass(frozen=True)
class FocResidual:
    """First-order-condition residual lhs - rhs at one threshold."""

    delta: float
    lhs: float
    rhs: float
    residual: float


def res_foc_residual(regime: BetaRegime, delta: float, alpha: float) -> FocResidual:
    """Residual of the stability first-order condition
    Lambda(delta) = alpha*TPR / (alpha*FPR + (1 - alpha))."""
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha={alpha} outside (0, 1)")
    lhs = likelihood_ratio(regime, delta)
    tpr = analytic_tpr(regime, delta)
    fpr = analytic_fpr(regime, delta)
    rhs = alpha * tpr / (alpha * fpr + (1.0 - alpha))
    return FocResidual(delta=delta, lhs=lhs, rhs=rhs, residual=lhs - rhs)


def solve_interior_threshold(
    regime: BetaRegime,
    alpha: float,
    eps: float = 1e-6,
    grid_points: int = 512,
    residual_tol: float = 1e-8,
) -> float:
    """Interior root of the first-order condition, by bracketing + bisection.

    Raises NoRootBracketError when the residual has no sign change on
    (eps, 1 - eps).
    """
    grid = np.linspace(eps, 1.0 - eps, grid_points)
    res = np.array([res_foc_residual(regime, float(t), alpha).residual for t in grid])
    lo = hi = None
    for i in range(len(grid) - 1):
        if res[i] == 0.0:
            return float(grid[i])
        if res[i] * res[i + 1] < 0.0:
            lo, hi = float(grid[i]), float(grid[i + 1])
            break
    if lo is None:
        raise NoRootBracketError(
            f"no sign change of the FOC residual on ({eps}, {1 - eps}) "
            f"for alpha={alpha}"
        )
    f_lo = res_foc_residual(regime, lo, alpha).residual
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        f_mid = res_foc_residual(regime, mid, alpha).residual
        if f_mid == 0.0:
            return mid
        if (f_lo < 0.0) == (f_mid < 0.0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    root = 0.5 * (lo + hi)
    if abs(res_foc_residual(regime, root, alpha).residual) > residual_tol:
        raise ArithmeticError(
            f"bisection converged to {root} but residual exceeds {residual_tol}"
        )
    return root


def f1_required_lr(pi: float, delta: float, regime: BetaRegime) -> float:
    """Likelihood ratio the F1 first-order condition demands at a threshold:
    ((1-pi)/(2 pi)) * TPR / (2 pi TPR + (1-pi) FPR). Diverges as pi -> 0."""
    if not 0.0 < pi < 1.0:
        raise DomainError(f"pi={pi} outside (0, 1)")
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta={delta} outside (0, 1)")
    tpr = analytic_tpr(regime, delta)
    fpr = analytic_fpr(regime, delta)
    return ((1.0 - pi) / (2.0 * pi)) * tpr / (2.0 * pi * tpr + (1.0 - pi) * fpr)


@dataclass(frozen=True)
class TradeoffPoint:
    """Analytic likelihood ratio at the empirical optimum for one prevalence."""

    pi: float
    delta_star: float
    lam: float
    boundary: bool


@dataclass(frozen=True)
class TradeoffCurve:
    points: tuple[TradeoffPoint, ...]

    @property
    def degenerate_flat(self) -> bool:
        """True when the implied trade-off does not move at all (e.g. the two
        classes share one distribution and Lambda is identically 1)."""
        lams = [p.lam for p in self.points if math.isfinite(p.lam)]
        if not lams:
            return True
        return max(lams) - min(lams) <= 1e-9 * max(abs(max(lams)), 1.0)


def implied_tradeoff_curve(
    regime: BetaRegime,
    spec: MetricSpec,
    prevalences,
    sample_budget: int = 10_000,
    seed: int = 0,
    n_cap: int = N_CAP_DEFAULT,
) -> TradeoffCurve:
    """Simulate one large sample per prevalence, optimize the metric, and
    report the analytic likelihood ratio at the empirical optimum.

    A bounded (flat-ish) curve is the stability diagnostic; divergence across
    the grid is the collapse signature.
    """
    if not spec.is_threshold_metric:
        raise DomainError("implied trade-off requires a threshold metric")
    points = []
    for k, pi in enumerate(prevalences):
        plan = plan_sample(pi, sample_budget, n_cap)
        scores, labels, weights = draw_regime_arrays(
            regime, plan, np.random.SeedSequence(seed, spawn_key=(k,))
        )
        path = build_path_arrays(scores, labels, weights)
        opt = optimize(path, spec)
        boundary = opt.path_index == SENTINEL_INDEX or opt.path_index == len(path) - 1
        if 0.0 < opt.delta < 1.0:
            try:
                lam = likelihood_ratio(regime, opt.delta)
            except SingularDensityError:
                lam, boundary = math.nan, True
        else:
            lam, boundary = math.nan, True
        points.append(
            TradeoffPoint(pi=pi, delta_star=opt.delta, lam=lam, boundary=boundary)
        )
    return TradeoffCurve(points=tuple(points))

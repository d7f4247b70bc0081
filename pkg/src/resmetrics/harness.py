"""Monte Carlo grid over (signal regime, prevalence), with stability statistics.

Replications are independent work items keyed by derived seeds, so results are
identical for any worker count. Aggregation consumes rows in deterministic
order.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DegenerateInputError
from .metrics import (
    MetricSpec,
    SENTINEL_INDEX,
    auc as path_auc,
    build_path_arrays,
    optimize,
)
from .sampler import (
    BetaRegime,
    MODERATE,
    N_CAP_DEFAULT,
    STRONG,
    SamplePlan,
    draw_regime_arrays,
    plan_sample,
    positives_for_prevalence,
    replication_seed,
)

DESK_PREVALENCES = (1e-2, 1e-3, 1e-4)
FULL_PREVALENCES = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6)
DESK_REPLICATIONS = 200
FULL_REPLICATIONS = 2000

DEFAULT_METRICS = (
    MetricSpec.f1(),
    MetricSpec.balanced_accuracy(),
    MetricSpec.mcc(),
    MetricSpec.res(0.10),
    MetricSpec.res(0.25),
    MetricSpec.res(0.50),
    MetricSpec.auc(),
)

_PERMUTATION_SEED = 0x5EA12AC  # fixed so small-n p-values are reproducible
_PERMUTATION_SHUFFLES = 10_000


@dataclass(frozen=True)
class SimConfig:
    """Full specification of one simulation grid run."""

    regimes: tuple[BetaRegime, ...] = (MODERATE, STRONG)
    prevalences: tuple[float, ...] = DESK_PREVALENCES
    replications: int = DESK_REPLICATIONS
    metric_set: tuple[MetricSpec, ...] = DEFAULT_METRICS
    master_seed: int = 0
    n_cap: int = N_CAP_DEFAULT
    auc_size_cutoff: float = 1e6
    n_pos_at_boundary: int = 20
    workers: int = 1

    def __post_init__(self):
        if self.replications < 2:
            raise ValueError("replications must be >= 2")
        if not self.regimes or not self.prevalences or not self.metric_set:
            raise ValueError("regimes, prevalences and metric_set must be nonempty")

    @classmethod
    def full_scale(cls, **overrides) -> "SimConfig":
        base = cls(
            prevalences=FULL_PREVALENCES, replications=FULL_REPLICATIONS
        )
        return replace(base, **overrides)


@dataclass(frozen=True)
class RawRecord:
    """One (replication, metric) outcome; AUC rows carry no threshold."""

    regime: str
    pi: float
    replication: int
    metric: str
    delta_star: float
    value: float
    path_index: int | None = None
    boundary: bool = False


@dataclass(frozen=True)
class CellSummary:
    regime: str
    pi: float
    metric: str
    n: int
    mean_delta: float | None
    sd_delta: float | None
    cv_delta: float | None
    min_delta: float | None
    max_delta: float | None
    mean_value: float | None
    sd_value: float | None
    cv_value: float | None
    error: str | None = None


@dataclass(frozen=True)
class DriftTest:
    metric: str
    regime: str
    rho: float | None
    p_value: float | None
    n: int
    basis: str = "replication"
    error: str | None = None


@dataclass(frozen=True)
class ReplicationResult:
    optima: dict
    auc_value: float | None
    n_nodes: int


@dataclass(frozen=True)
class GridResult:
    config: SimConfig
    records: list[RawRecord] = field(default_factory=list)
    cells: list[CellSummary] = field(default_factory=list)


def run_replication(
    regime: BetaRegime,
    plan: SamplePlan,
    metric_set,
    seed,
    compute_auc: bool | None = None,
    auc_size_cutoff: float = 1e6,
) -> ReplicationResult:
    """Draw one sample, build its path, and optimize every metric on it."""
    scores, labels, weights = draw_regime_arrays(regime, plan, seed)
    path = build_path_arrays(scores, labels, weights)
    if compute_auc is None:
        compute_auc = (plan.n_pos + plan.n_neg_sim) < auc_size_cutoff
    optima = {}
    auc_value = None
    for spec in metric_set:
        if spec.kind == "auc":
            if compute_auc:
                auc_value = path_auc(path)
            continue
        optima[spec.key] = optimize(path, spec)
    return ReplicationResult(optima=optima, auc_value=auc_value, n_nodes=len(path))


def _replication_records(regime, pi, rep, metric_set, result) -> list[RawRecord]:
    rows = []
    for spec in metric_set:
        if spec.kind == "auc":
            if result.auc_value is not None:
                rows.append(
                    RawRecord(
                        regime=regime.name,
                        pi=pi,
                        replication=rep,
                        metric="auc",
                        delta_star=math.nan,
                        value=result.auc_value,
                    )
                )
            continue
        opt = result.optima[spec.key]
        rows.append(
            RawRecord(
                regime=regime.name,
                pi=pi,
                replication=rep,
                metric=spec.key,
                delta_star=opt.delta,
                value=opt.value,
                path_index=opt.path_index,
                boundary=(
                    opt.path_index == SENTINEL_INDEX
                    or opt.path_index == result.n_nodes - 1
                ),
            )
        )
    return rows


def _worker_run(args):
    (regime, plan, metric_set, master_seed, ridx, pidx, rep, cutoff) = args
    seed = replication_seed(master_seed, ridx, pidx, rep)
    return ridx, pidx, rep, run_replication(
        regime, plan, metric_set, seed, auc_size_cutoff=cutoff
    )


def _cv(values: np.ndarray) -> float | None:
    mean = float(np.mean(values))
    sd = float(np.std(values, ddof=1)) if len(values) > 1 else 0.0
    if mean == 0.0:
        return 0.0 if sd == 0.0 else None
    return sd / mean


def _summarize_cell(regime, pi, metric, rows) -> CellSummary:
    deltas = np.array([r.delta_star for r in rows])
    values = np.array([r.value for r in rows])
    have_delta = not np.isnan(deltas).all()

    def stats(x):
        mean = float(np.mean(x))
        sd = float(np.std(x, ddof=1)) if len(x) > 1 else 0.0
        return mean, sd, _cv(x)

    mean_v, sd_v, cv_v = stats(values)
    if have_delta:
        mean_d, sd_d, cv_d = stats(deltas)
        min_d, max_d = float(deltas.min()), float(deltas.max())
    else:
        mean_d = sd_d = cv_d = min_d = max_d = None
    return CellSummary(
        regime=regime,
        pi=pi,
        metric=metric,
        n=len(rows),
        mean_delta=mean_d,
        sd_delta=sd_d,
        cv_delta=cv_d,
        min_delta=min_d,
        max_delta=max_d,
        mean_value=mean_v,
        sd_value=sd_v,
        cv_value=cv_v,
    )


def run_grid(config: SimConfig) -> GridResult:
    """Run the full (regime x prevalence x replication) grid.

    Deterministic for a fixed config (including master_seed) under any worker
    count. A failure inside a cell aborts that cell and is recorded on its
    CellSummary; other cells are unaffected.
    """
    plans = {}
    for pi in config.prevalences:
        n_pos = positives_for_prevalence(pi, config.n_pos_at_boundary)
        plans[pi] = plan_sample(pi, n_pos, config.n_cap)

    cell_results: dict[tuple[int, int], dict[int, ReplicationResult] | str] = {}
    tasks = [
        (
            config.regimes[ridx],
            plans[config.prevalences[pidx]],
            config.metric_set,
            config.master_seed,
            ridx,
            pidx,
            rep,
            config.auc_size_cutoff,
        )
        for ridx in range(len(config.regimes))
        for pidx in range(len(config.prevalences))
        for rep in range(config.replications)
    ]

    failures: dict[tuple[int, int], tuple[int, str]] = {}

    def record_failure(key, rep, exc):
        msg = f"{type(exc).__name__}: {exc}"
        if key not in failures or rep < failures[key][0]:
            failures[key] = (rep, msg)

    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            futures = [(t, pool.submit(_worker_run, t)) for t in tasks]
            for t, fut in futures:
                key = (t[4], t[5])
                try:
                    ridx, pidx, rep, result = fut.result()
                except Exception as exc:
                    record_failure(key, t[6], exc)
                    continue
                cell_results.setdefault(key, {})[rep] = result
    else:
        for t in tasks:
            key = (t[4], t[5])
            if key in failures:
                continue
            try:
                ridx, pidx, rep, result = _worker_run(t)
            except Exception as exc:  # cell aborts, error recorded
                record_failure(key, t[6], exc)
                continue
            cell_results.setdefault(key, {})[rep] = result
    for key, (_, msg) in failures.items():
        cell_results[key] = msg

    records: list[RawRecord] = []
    cells: list[CellSummary] = []
    for ridx, regime in enumerate(config.regimes):
        for pidx, pi in enumerate(config.prevalences):
            got = cell_results.get((ridx, pidx), {})
            if isinstance(got, str):
                for spec in config.metric_set:
                    cells.append(
                        CellSummary(
                            regime=regime.name, pi=pi, metric=spec.key, n=0,
                            mean_delta=None, sd_delta=None, cv_delta=None,
                            min_delta=None, max_delta=None, mean_value=None,
                            sd_value=None, cv_value=None, error=got,
                        )
                    )
                continue
            cell_rows: list[RawRecord] = []
            for rep in range(config.replications):
                cell_rows.extend(
                    _replication_records(regime, pi, rep, config.metric_set, got[rep])
                )
            records.extend(cell_rows)
            for spec in config.metric_set:
                rows = [r for r in cell_rows if r.metric == spec.key]
                if rows:
                    cells.append(_summarize_cell(regime.name, pi, spec.key, rows))
    return GridResult(config=config, records=records, cells=cells)


def _average_ranks(x: np.ndarray) -> np.ndarray:
    order = np.argsort(x, kind="stable")
    ranks = np.empty(len(x))
    sx = x[order]
    i = 0
    while i < len(sx):
        j = i
        while j + 1 < len(sx) and sx[j + 1] == sx[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def _rank_corr(rx: np.ndarray, ry: np.ndarray) -> float:
    dx = rx - rx.mean()
    dy = ry - ry.mean()
    den = math.sqrt(float(dx @ dx) * float(dy @ dy))
    return float(dx @ dy) / den


def spearman(x, y) -> tuple[float, float]:
    """Spearman rank correlation with average ranks for ties.

    p-value: two-sided t-approximation for n > 30 pairs, otherwise a
    fixed-seed Monte Carlo permutation test with 10^4 shuffles.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1 or len(x) < 3:
        raise ValueError("spearman requires two equal-length 1-d arrays, n >= 3")
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise DegenerateInputError("constant input array")
    rx = _average_ranks(x)
    ry = _average_ranks(y)
    rho = _rank_corr(rx, ry)
    n = len(x)
    if n > 30:
        if abs(rho) >= 1.0:
            return rho, 0.0
        t_stat = rho * math.sqrt((n - 2) / (1.0 - rho * rho))
        from .oracle import student_t_two_sided_p

        return rho, student_t_two_sided_p(t_stat, n - 2)
    rng = np.random.default_rng(_PERMUTATION_SEED)
    hits = 0
    target = abs(rho) - 1e-12
    for _ in range(_PERMUTATION_SHUFFLES):
        perm = rng.permutation(ry)
        if abs(_rank_corr(rx, perm)) >= target:
            hits += 1
    return rho, (hits + 1) / (_PERMUTATION_SHUFFLES + 1)


def drift_tests(records, cell_means: bool = False) -> list[DriftTest]:
    """Spearman correlation of each metric's threshold (AUC: value) against
    log10(prevalence), per regime.

    `cell_means` switches from replication-level points to per-prevalence cell
    means.
    """
    groups: dict[tuple[str, str], list[RawRecord]] = {}
    order: list[tuple[str, str]] = []
    for r in records:
        key = (r.metric, r.regime)
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(r)
    out = []
    basis = "cell_mean" if cell_means else "replication"
    for metric, regime in order:
        rows = groups[(metric, regime)]
        pis = sorted({r.pi for r in rows})
        if len(pis) < 3:
            out.append(
                DriftTest(metric=metric, regime=regime, rho=None, p_value=None,
                          n=len(rows), basis=basis,
                          error="needs >= 3 prevalence levels")
            )
            continue
        if cell_means:
            xs, ys = [], []
            for pi in pis:
                vals = [
                    r.value if metric == "auc" else r.delta_star
                    for r in rows
                    if r.pi == pi
                ]
                xs.append(math.log10(pi))
                ys.append(float(np.mean(vals)))
        else:
            xs = [math.log10(r.pi) for r in rows]
            ys = [r.value if metric == "auc" else r.delta_star for r in rows]
        try:
            rho, p = spearman(np.array(xs), np.array(ys))
            out.append(DriftTest(metric=metric, regime=regime, rho=rho,
                                 p_value=p, n=len(xs), basis=basis))
        except DegenerateInputError as exc:
            out.append(DriftTest(metric=metric, regime=regime, rho=None,
                                 p_value=None, n=len(xs), basis=basis,
                                 error=str(exc)))
    return out


@dataclass(frozen=True)
class PooledSummary:
    """Per (regime, metric) statistics pooled across the prevalence grid."""

    regime: str
    metric: str
    n: int
    mean_delta: float | None
    cv_delta: float | None
    mean_value: float
    cv_value: float | None


def pooled_summaries(records) -> list[PooledSummary]:
    groups: dict[tuple[str, str], list[RawRecord]] = {}
    order = []
    for r in records:
        key = (r.regime, r.metric)
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(r)
    out = []
    for regime, metric in order:
        rows = groups[(regime, metric)]
        deltas = np.array([r.delta_star for r in rows])
        values = np.array([r.value for r in rows])
        if np.isnan(deltas).all():
            mean_d, cv_d = None, None
        else:
            mean_d, cv_d = float(np.mean(deltas)), _cv(deltas)
        out.append(
            PooledSummary(
                regime=regime, metric=metric, n=len(rows),
                mean_delta=mean_d, cv_delta=cv_d,
                mean_value=float(np.mean(values)), cv_value=_cv(values),
            )
        )
    return out

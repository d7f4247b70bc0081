"""Rare-event-stable classification metrics toolkit.

Exact threshold-path construction and metric optimization under extreme class
imbalance, weighted rare-event simulation, analytic first-order-condition
diagnostics, bootstrap stability studies, and policy-parameter calibration.
"""

__version__ = "0.1.0"

from ._backend import BACKEND, available_backends
from .calibration import (
    AlphaGrid,
    CalibrationResult,
    CalibrationTarget,
    calibrate,
    calibrate_cost,
    calibrate_historical,
    calibrate_loss,
    calibrate_rate,
)
from .errors import (
    DegenerateInputError,
    DomainError,
    EmptyClassError,
    IndexOutOfRangeError,
    InvalidPrevalenceError,
    MissingColumnError,
    NonpositiveCostError,
    NoRootBracketError,
    NotThresholdMetricError,
    ParseError,
    RangeError,
    ResMetricsError,
    SingularDensityError,
)
from .harness import (
    CellSummary,
    DriftTest,
    GridResult,
    RawRecord,
    SimConfig,
    drift_tests,
    pooled_summaries,
    run_grid,
    run_replication,
    spearman,
)
from .metrics import (
    MetricSpec,
    OptimalThreshold,
    RatePoint,
    SENTINEL_INDEX,
    ThresholdPath,
    WeightedSample,
    alarm_rate_at,
    auc,
    build_path,
    build_path_arrays,
    metric_at,
    metric_curve,
    optimize,
    parse_metric_spec,
    rates_at,
)
from .oracle import (
    FocResidual,
    beta_cdf,
    beta_pdf,
    f1_required_lr,
    implied_tradeoff_curve,
    likelihood_ratio,
    res_foc_residual,
    solve_interior_threshold,
)
from .pipeline import (
    BootstrapConfig,
    BootstrapResult,
    RegimeSpec,
    ScoreRecord,
    bootstrap_study,
    build_regime,
    load_scores,
    stability_report,
)
from .sampler import (
    BetaRegime,
    MODERATE,
    N_CAP_DEFAULT,
    STRONG,
    SamplePlan,
    draw_regime,
    draw_regime_arrays,
    plan_sample,
    positives_for_prevalence,
    prevalence_grid,
    regime_by_name,
)

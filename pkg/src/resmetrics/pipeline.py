"""Ingestion of externally produced score/label data, prevalence-regime
construction, and the bootstrap threshold-stability study.

The pipeline starts at (score, label) pairs: model fitting and preprocessing
happen upstream. Regimes down-sample positives while retaining every negative;
bootstrap replications re-sample the regime with replacement under derived
seeds.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateInputError,
    EmptyClassError,
    MissingColumnError,
    ParseError,
    RangeError,
)
from .metrics import MetricSpec, build_path_arrays, auc as path_auc, optimize

MAX_RESAMPLE_RETRIES = 100


@dataclass(frozen=True)
class ScoreRecord:
    """One scored observation with unit weight."""

    score: float
    label: int
    id: str | None = None


def _validate_record(score: float, label, line: int) -> None:
    if not math.isfinite(score) or not 0.0 <= score <= 1.0:
        raise RangeError(f"score {score} outside [0, 1]", line)
    if label not in (0, 1):
        raise RangeError(f"label {label} not in {{0, 1}}", line)


def load_scores(path, fmt: str = "csv") -> list[ScoreRecord]:
    """Read and validate a scores file.

    CSV needs a header with `score` and `label` columns (optional `id`);
    JSON-lines rows are objects with the same keys. Malformed rows raise with
    their 1-based physical line number.
    """
    if fmt not in ("csv", "jsonl"):
        raise ValueError(f"format must be csv or jsonl, got {fmt!r}")
    records: list[ScoreRecord] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        if fmt == "csv":
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise MissingColumnError("empty file: missing score,label header") from None
            cols = [c.strip().lower() for c in header]
            if "score" not in cols or "label" not in cols:
                raise MissingColumnError(
                    f"header must contain score and label columns, got {header}"
                )
            i_score = cols.index("score")
            i_label = cols.index("label")
            i_id = cols.index("id") if "id" in cols else None
            for line, row in enumerate(reader, start=2):
                if not row or all(not c.strip() for c in row):
                    continue
                if len(row) < len(cols):
                    raise ParseError(f"expected {len(cols)} fields, got {len(row)}", line)
                try:
                    score = float(row[i_score])
                except ValueError:
                    raise ParseError(f"bad score field {row[i_score]!r}", line) from None
                raw_label = row[i_label].strip()
                try:
                    label = int(raw_label)
                except ValueError:
                    raise ParseError(f"bad label field {raw_label!r}", line) from None
                _validate_record(score, label, line)
                rec_id = row[i_id].strip() if i_id is not None else None
                records.append(ScoreRecord(score=score, label=label, id=rec_id or None))
        else:
            for line, raw in enumerate(fh, start=1):
                if not raw.strip():
                    continue
                try:
                    obj = json.loads(raw)
                except json.JSONDecodeError as exc:
                    raise ParseError(f"bad json: {exc.msg}", line) from None
                if "score" not in obj or "label" not in obj:
                    raise MissingColumnError(f"line {line}: object needs score and label")
                try:
                    score = float(obj["score"])
                    label = int(obj["label"])
                except (TypeError, ValueError):
                    raise ParseError("score/label not numeric", line) from None
                _validate_record(score, label, line)
                records.append(
                    ScoreRecord(score=score, label=label, id=obj.get("id"))
                )
    return records


@dataclass(frozen=True)
class RegimeSpec:
    """Realized counts for one down-sampled prevalence regime."""

    target_pi: float
    seed: int
    n_pos: int
    n_neg: int
    n_total: int
    empirical_pi: float
    fallback_full: bool = False


def build_regime(records, target_pi: float, seed: int):
    """Down-sample positives (uniform, without replacement) to hit a target
    prevalence while retaining every negative.

    Required positives: round(target_pi / (1 - target_pi) * n_neg); when that
    exceeds availability the full record set is returned with the fallback
    flag set.
    """
    if not 0.0 < target_pi < 1.0:
        raise ValueError(f"target_pi {target_pi} outside (0, 1)")
    positives = [r for r in records if r.label == 1]
    negatives = [r for r in records if r.label == 0]
    if not positives or not negatives:
        raise EmptyClassError("records must contain both classes")
    n_neg = len(negatives)
    n_pos_req = round(target_pi / (1.0 - target_pi) * n_neg)
    if n_pos_req >= len(positives):
        spec = RegimeSpec(
            target_pi=target_pi, seed=seed, n_pos=len(positives), n_neg=n_neg,
            n_total=len(positives) + n_neg,
            empirical_pi=len(positives) / (len(positives) + n_neg),
            fallback_full=True,
        )
        return spec, list(records)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    chosen = np.sort(rng.choice(len(positives), size=n_pos_req, replace=False))
    kept = [positives[int(i)] for i in chosen]
    spec = RegimeSpec(
        target_pi=target_pi, seed=seed, n_pos=n_pos_req, n_neg=n_neg,
        n_total=n_pos_req + n_neg,
        empirical_pi=n_pos_req / (n_pos_req + n_neg),
        fallback_full=False,
    )
    return spec, kept + negatives


@dataclass(frozen=True)
class BootstrapConfig:
    b: int = 500
    sample_size: int | None = None  # default: the regime size
    metric_set: tuple[MetricSpec, ...] = (
        MetricSpec.f1(),
        MetricSpec.balanced_accuracy(),
        MetricSpec.mcc(),
        MetricSpec.res(0.10),
        MetricSpec.res(0.25),
        MetricSpec.res(0.50),
    )
    master_seed: int = 0

    def __post_init__(self):
        if self.b < 2:
            raise ValueError("bootstrap replication count must be >= 2")


@dataclass(frozen=True)
class BootstrapRow:
    replication: int
    metric: str
    delta_star: float
    value: float


@dataclass(frozen=True)
class BootstrapResult:
    rows: list[BootstrapRow] = field(default_factory=list)
    retries: dict = field(default_factory=dict)  # replication -> redraw count
    failed: list = field(default_factory=list)  # replications with no valid draw


def bootstrap_study(records, config: BootstrapConfig) -> BootstrapResult:
    """Draw B bootstrap samples and record each metric's optimum per draw.

    Resamples missing a class are redrawn (up to MAX_RESAMPLE_RETRIES) from the
    same replication stream; exhausting the budget marks the replication
    failed. Deterministic for fixed (records, config).
    """
    scores = np.array([r.score for r in records], dtype=np.float64)
    labels = np.array([r.label for r in records], dtype=np.int64)
    if not (labels == 1).any() or not (labels == 0).any():
        raise EmptyClassError("records must contain both classes")
    n = len(records)
    size = config.sample_size or n
    rows: list[BootstrapRow] = []
    retries: dict[int, int] = {}
    failed: list[int] = []
    for b in range(config.b):
        rng = np.random.default_rng(
            np.random.SeedSequence(config.master_seed, spawn_key=(b,))
        )
        path = None
        for attempt in range(MAX_RESAMPLE_RETRIES + 1):
            idx = rng.integers(0, n, size=size)
            lab = labels[idx]
            if lab.min() == lab.max():
                continue
            if attempt:
                retries[b] = attempt
            path = build_path_arrays(scores[idx], lab, np.ones(size))
            break
        if path is None:
            retries[b] = MAX_RESAMPLE_RETRIES
            failed.append(b)
            continue
        for spec in config.metric_set:
            if spec.kind == "auc":
                rows.append(
                    BootstrapRow(replication=b, metric="auc",
                                 delta_star=math.nan, value=path_auc(path))
                )
                continue
            opt = optimize(path, spec)
            rows.append(
                BootstrapRow(replication=b, metric=spec.key,
                             delta_star=opt.delta, value=opt.value)
            )
    return BootstrapResult(rows=rows, retries=retries, failed=failed)


def _cv(values: np.ndarray) -> float:
    mean = float(np.mean(values))
    sd = float(np.std(values, ddof=1)) if len(values) > 1 else 0.0
    if mean == 0.0:
        if sd == 0.0:
            return 0.0
        raise DegenerateInputError("coefficient of variation undefined: zero mean")
    return sd / mean


def stability_report(regime_tables) -> dict:
    """Aggregate bootstrap tables across regimes.

    `regime_tables` maps a regime key (e.g. target prevalence) to its rows.
    Per metric: min/max/range over regime-level mean thresholds, and CV pooled
    over all replications across regimes; per (metric, regime): within-regime
    mean and CV.
    """
    if len(regime_tables) < 2:
        raise ValueError("stability report needs >= 2 regimes")
    metrics: list[str] = []
    for rows in regime_tables.values():
        for row in rows:
            if row.metric not in metrics:
                metrics.append(row.metric)
    report: dict = {}
    for metric in metrics:
        regime_means: dict = {}
        per_regime: dict = {}
        pooled_d: list[float] = []
        pooled_v: list[float] = []
        for key, rows in regime_tables.items():
            deltas = np.array([r.delta_star for r in rows if r.metric == metric])
            values = np.array([r.value for r in rows if r.metric == metric])
            if len(deltas) == 0:
                continue
            has_delta = not np.isnan(deltas).all()
            entry = {
                "n": int(len(values)),
                "mean_value": float(np.mean(values)),
                "cv_value": _cv(values),
            }
            if has_delta:
                entry["mean_delta"] = float(np.mean(deltas))
                entry["cv_delta"] = _cv(deltas)
                regime_means[key] = entry["mean_delta"]
                pooled_d.extend(deltas.tolist())
            per_regime[key] = entry
            pooled_v.extend(values.tolist())
        summary: dict = {"per_regime": per_regime}
        if regime_means:
            means = np.array(list(regime_means.values()))
            pooled = np.array(pooled_d)
            summary.update(
                min_delta=float(means.min()),
                max_delta=float(means.max()),
                range_delta=float(means.max() - means.min()),
                cv_delta_pooled=_cv(pooled),
                mean_delta_pooled=float(np.mean(pooled)),
            )
        pooled_vals = np.array(pooled_v)
        summary["mean_value_pooled"] = float(np.mean(pooled_vals))
        summary["cv_value_pooled"] = _cv(pooled_vals)
        report[metric] = summary
    return report

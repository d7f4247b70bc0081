"""Threshold paths and exact per-threshold metric evaluation/optimization.

A ThresholdPath is the evaluation lattice for every threshold-based metric: the
distinct score values in descending order together with cumulative weighted
true/false positive mass at or above each value. The alarm rule is
``score >= delta``; the never-alarm candidate is represented by path index -1
and reported with delta = 1.0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from ._backend import kernels
from .errors import (
    EmptyClassError,
    IndexOutOfRangeError,
    NotThresholdMetricError,
)

SENTINEL_INDEX = -1
SENTINEL_DELTA = 1.0

_KIND_CODES = {
    "f1": kernels.F1,
    "fbeta": kernels.FBETA,
    "ba": kernels.BALANCED_ACCURACY,
    "accuracy": kernels.ACCURACY,
    "mcc": kernels.MCC,
    "res": kernels.RES,
    "genres": kernels.GENRES,
    "costloss": kernels.COSTLOSS,
}


@dataclass(frozen=True)
class WeightedSample:
    """One scored observation: score in [0,1], binary label, positive weight."""

    score: float
    label: int
    weight: float = 1.0

    def __post_init__(self):
        if not (0.0 <= self.score <= 1.0):
            raise ValueError(f"score {self.score} outside [0, 1]")
        if self.label not in (0, 1):
            raise ValueError(f"label {self.label} not in {{0, 1}}")
        if not (self.weight > 0.0) or not np.isfinite(self.weight):
            raise ValueError(f"weight {self.weight} must be positive and finite")


@dataclass(frozen=True)
class MetricSpec:
    """Tagged union naming a metric and its parameters.

    ``costloss`` is minimized; every other metric is maximized. ``auc`` is
    path-global and cannot be evaluated at a single threshold.
    """

    kind: str
    alpha: float | None = None
    gamma: float | None = None
    beta: float | None = None
    c_fp: float | None = None
    c_fn: float | None = None

    def __post_init__(self):
        k = self.kind
        if k in ("f1", "ba", "accuracy", "mcc", "auc"):
            pass
        elif k == "fbeta":
            if self.beta is None or not self.beta > 0:
                raise ValueError("fbeta requires beta > 0")
        elif k == "res":
            if self.alpha is None or not 0.0 < self.alpha < 1.0:
                raise ValueError("res requires alpha in (0, 1)")
        elif k == "genres":
            if self.alpha is None or not 0.0 < self.alpha < 1.0:
                raise ValueError("genres requires alpha in (0, 1)")
            if self.gamma is None or not self.gamma > 0:
                raise ValueError("genres requires gamma > 0")
        elif k == "costloss":
            if self.c_fp is None or self.c_fn is None or self.c_fp <= 0 or self.c_fn <= 0:
                raise ValueError("costloss requires positive c_fp and c_fn")
        else:
            raise ValueError(f"unknown metric kind {k!r}")

    # -- constructors -------------------------------------------------------
    @classmethod
    def f1(cls) -> "MetricSpec":
        return cls("f1")

    @classmethod
    def fbeta(cls, beta: float) -> "MetricSpec":
        return cls("fbeta", beta=beta)

    @classmethod
    def balanced_accuracy(cls) -> "MetricSpec":
        return cls("ba")

    @classmethod
    def accuracy(cls) -> "MetricSpec":
        return cls("accuracy")

    @classmethod
    def mcc(cls) -> "MetricSpec":
        return cls("mcc")

    @classmethod
    def auc(cls) -> "MetricSpec":
        return cls("auc")

    @classmethod
    def res(cls, alpha: float) -> "MetricSpec":
        return cls("res", alpha=alpha)

    @classmethod
    def gen_res(cls, alpha: float, gamma: float) -> "MetricSpec":
        return cls("genres", alpha=alpha, gamma=gamma)

    @classmethod
    def cost_loss(cls, c_fp: float, c_fn: float) -> "MetricSpec":
        return cls("costloss", c_fp=c_fp, c_fn=c_fn)

    # -- behaviour ----------------------------------------------------------
    @property
    def minimized(self) -> bool:
        return self.kind == "costloss"

    @property
    def is_threshold_metric(self) -> bool:
        return self.kind != "auc"

    @property
    def key(self) -> str:
        """Stable identifier used in raw tables and CLI output."""
        k = self.kind
        if k == "fbeta":
            return f"fbeta_{self.beta:g}"
        if k == "res":
            return f"res_{self.alpha:g}"
        if k == "genres":
            return f"genres_{self.alpha:g}_{self.gamma:g}"
        if k == "costloss":
            return f"costloss_{self.c_fp:g}_{self.c_fn:g}"
        return k

    def _kernel_args(self):
        code = _KIND_CODES[self.kind]
        if self.kind == "fbeta":
            return code, self.beta, 0.0
        if self.kind in ("res", "genres"):
            return code, self.alpha, self.gamma or 0.0
        if self.kind == "costloss":
            return code, self.c_fp, self.c_fn
        return code, 0.0, 0.0


def parse_metric_spec(text: str) -> MetricSpec:
    """Parse a compact metric string, e.g. ``f1``, ``res:0.5``, ``fbeta:2``,
    ``genres:0.5:2``, ``costloss:1:20``."""
    parts = text.strip().lower().split(":")
    name, args = parts[0], [float(p) for p in parts[1:]]
    if name == "f1" and not args:
        return MetricSpec.f1()
    if name == "fbeta" and len(args) == 1:
        return MetricSpec.fbeta(args[0])
    if name in ("ba", "balanced_accuracy") and not args:
        return MetricSpec.balanced_accuracy()
    if name == "accuracy" and not args:
        return MetricSpec.accuracy()
    if name == "mcc" and not args:
        return MetricSpec.mcc()
    if name == "auc" and not args:
        return MetricSpec.auc()
    if name == "res" and len(args) == 1:
        return MetricSpec.res(args[0])
    if name == "genres" and len(args) == 2:
        return MetricSpec.gen_res(args[0], args[1])
    if name == "costloss" and len(args) == 2:
        return MetricSpec.cost_loss(args[0], args[1])
    raise ValueError(f"cannot parse metric spec {text!r}")


@dataclass(frozen=True)
class ThresholdPath:
    """Distinct descending score cuts with cumulative weighted counts."""

    thresholds: np.ndarray
    cum_tp: np.ndarray
    cum_fp: np.ndarray
    total_pos: float = field(init=False)
    total_neg: float = field(init=False)

    def __post_init__(self):
        for a in (self.thresholds, self.cum_tp, self.cum_fp):
            a.setflags(write=False)
        object.__setattr__(self, "total_pos", float(self.cum_tp[-1]))
        object.__setattr__(self, "total_neg", float(self.cum_fp[-1]))

    def __len__(self) -> int:
        return self.thresholds.shape[0]

    @property
    def prevalence(self) -> float:
        """Weighted sample prevalence implied by the class totals."""
        return self.total_pos / (self.total_pos + self.total_neg)

    def _check_index(self, index: int) -> int:
        if index == SENTINEL_INDEX:
            return index
        if 0 <= index < len(self):
            return index
        raise IndexOutOfRangeError(
            f"path index {index} outside [-1, {len(self)})"
        )


@dataclass(frozen=True)
class RatePoint:
    """Confusion rates and weighted counts at one path candidate."""

    tpr: float
    fpr: float
    tnr: float
    precision: float | None
    tp_w: float
    fp_w: float
    fn_w: float
    tn_w: float


@dataclass(frozen=True)
class OptimalThreshold:
    """Metric optimum over the path plus the never-alarm candidate."""

    delta: float
    value: float
    path_index: int


def _as_arrays(samples):
    if isinstance(samples, tuple) and len(samples) == 3:
        scores, labels, weights = samples
        scores = np.ascontiguousarray(scores, dtype=np.float64)
        labels = np.ascontiguousarray(labels)
        weights = np.ascontiguousarray(weights, dtype=np.float64)
        return scores, labels, weights
    items = list(samples)
    scores = np.array([s.score for s in items], dtype=np.float64)
    labels = np.array([s.label for s in items], dtype=np.int64)
    weights = np.array([s.weight for s in items], dtype=np.float64)
    return scores, labels, weights


def build_path(samples: Iterable[WeightedSample]) -> ThresholdPath:
    """Build the exact threshold path from weighted samples.

    Samples sharing a score value merge into one node. Raises EmptyClassError
    unless both classes carry positive total weight.
    """
    scores, labels, weights = _as_arrays(samples)
    return build_path_arrays(scores, labels, weights)


def build_path_arrays(scores: np.ndarray, labels: np.ndarray, weights: np.ndarray) -> ThresholdPath:
    """Array-based variant of :func:`build_path` (hot path for the harness)."""
    if scores.ndim != 1 or scores.shape != labels.shape or scores.shape != weights.shape:
        raise ValueError("scores, labels, weights must be equal-length 1-d arrays")
    if scores.shape[0] == 0:
        raise EmptyClassError("no samples")
    if np.any(~np.isfinite(scores)) or scores.min() < 0.0 or scores.max() > 1.0:
        raise ValueError("scores must lie in [0, 1]")
    lab = np.asarray(labels)
    if not np.isin(lab, (0, 1)).all():
        raise ValueError("labels must be 0 or 1")
    if np.any(~np.isfinite(weights)) or weights.min() <= 0.0:
        raise ValueError("weights must be positive and finite")
    pos = lab == 1
    if not pos.any():
        raise EmptyClassError("no positive-label mass")
    if pos.all():
        raise EmptyClassError("no negative-label mass")

    order = np.argsort(-np.asarray(scores, dtype=np.float64), kind="stable")
    s = np.ascontiguousarray(scores[order], dtype=np.float64)
    w = weights[order]
    p = pos[order]
    pos_w = np.where(p, w, 0.0)
    neg_w = np.where(p, 0.0, w)
    thr, cum_tp, cum_fp = kernels.merge_path(
        s, np.ascontiguousarray(pos_w), np.ascontiguousarray(neg_w)
    )
    return ThresholdPath(thr, cum_tp, cum_fp)


def rates_at(path: ThresholdPath, index: int) -> RatePoint:
    """Confusion rates at a path node, or at the never-alarm sentinel (-1)."""
    index = path._check_index(index)
    if index == SENTINEL_INDEX:
        tp = fp = 0.0
    else:
        tp = float(path.cum_tp[index])
        fp = float(path.cum_fp[index])
    fn = path.total_pos - tp
    tn = path.total_neg - fp
    fpr = fp / path.total_neg
    precision = tp / (tp + fp) if tp + fp > 0.0 else None
    return RatePoint(
        tpr=tp / path.total_pos,
        fpr=fpr,
        tnr=1.0 - fpr,
        precision=precision,
        tp_w=tp,
        fp_w=fp,
        fn_w=fn,
        tn_w=tn,
    )


def _genres_aux(path: ThresholdPath, spec: MetricSpec) -> np.ndarray | None:
    if spec.kind != "genres":
        return None
    # np.power is applied to the full node array in every code path so that
    # metric_at, metric_curve and optimize agree bitwise.
    return np.power(path.cum_tp / path.total_pos, spec.gamma)


def metric_at(path: ThresholdPath, index: int, spec: MetricSpec) -> float:
    """Metric value at one path candidate (sentinel allowed via index -1)."""
    if not spec.is_threshold_metric:
        raise NotThresholdMetricError("auc is path-global; use auc(path)")
    index = path._check_index(index)
    code, p1, p2 = spec._kernel_args()
    if index == SENTINEL_INDEX:
        return float(kernels.sentinel_value(path.total_pos, path.total_neg, code, p1, p2))
    aux = _genres_aux(path, spec)
    vals = kernels.metric_values(
        path.cum_tp, path.cum_fp, path.total_pos, path.total_neg, code, p1, p2, aux
    )
    return float(vals[index])


def metric_curve(path: ThresholdPath, spec: MetricSpec):
    """Metric value at the sentinel and every node, in path order.

    Returns (thresholds, values); the first entry is the never-alarm candidate
    reported at threshold 1.0.
    """
    if not spec.is_threshold_metric:
        raise NotThresholdMetricError("auc is path-global; use auc(path)")
    code, p1, p2 = spec._kernel_args()
    aux = _genres_aux(path, spec)
    vals = kernels.metric_values(
        path.cum_tp, path.cum_fp, path.total_pos, path.total_neg, code, p1, p2, aux
    )
    sent = kernels.sentinel_value(path.total_pos, path.total_neg, code, p1, p2)
    thresholds = np.concatenate(([SENTINEL_DELTA], path.thresholds))
    values = np.concatenate(([sent], vals))
    return thresholds, values


def optimize(path: ThresholdPath, spec: MetricSpec) -> OptimalThreshold:
    """Global optimum over all path nodes plus the never-alarm candidate.

    Ties on exactly equal values resolve to the smallest threshold.
    """
    if not spec.is_threshold_metric:
        raise NotThresholdMetricError("auc is path-global; use auc(path)")
    code, p1, p2 = spec._kernel_args()
    aux = _genres_aux(path, spec)
    index, value = kernels.optimize_scan(
        path.cum_tp, path.cum_fp, path.total_pos, path.total_neg, code, p1, p2, aux
    )
    index = int(index)
    delta = SENTINEL_DELTA if index == SENTINEL_INDEX else float(path.thresholds[index])
    return OptimalThreshold(delta=delta, value=float(value), path_index=index)


def auc(path: ThresholdPath) -> float:
    """Weighted ROC area; ties between classes count at half weight."""
    return float(
        kernels.auc_from_path(path.cum_tp, path.cum_fp, path.total_pos, path.total_neg)
    )


def alarm_rate_at(path: ThresholdPath, index: int) -> float:
    """Weighted fraction of all samples at or above the candidate threshold."""
    index = path._check_index(index)
    if index == SENTINEL_INDEX:
        return 0.0
    covered = float(path.cum_tp[index]) + float(path.cum_fp[index])
    return covered / (path.total_pos + path.total_neg)

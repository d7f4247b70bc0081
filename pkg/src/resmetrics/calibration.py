"""Calibration of the policy parameter from institutional targets.

Four modes: closed-form cost ratio, matching a historical threshold, matching
an intervention-rate capacity, and matching the loss-optimal threshold. The
three data-driven modes are exact grid searches (the induced threshold is a
step function of the policy parameter on finite samples), with ties resolved
toward the smaller parameter and edge solutions flagged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonpositiveCostError
from .metrics import (
    MetricSpec,
    ThresholdPath,
    alarm_rate_at,
    build_path,
    optimize,
)


@dataclass(frozen=True)
class AlphaGrid:
    """Ordered, strictly interior grid of candidate policy parameters."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1 or len(v) < 1:
            raise ValueError("grid must be a nonempty 1-d array")
        if not (np.all(np.diff(v) > 0) and v[0] > 0.0 and v[-1] < 1.0):
            raise ValueError("grid must be strictly increasing inside (0, 1)")
        object.__setattr__(self, "values", v)
        v.setflags(write=False)

    @classmethod
    def default(cls, step: float = 0.001) -> "AlphaGrid":
        n = int(round(1.0 / step))
        return cls(np.arange(1, n) / n)

    @property
    def step(self) -> float:
        return float(np.min(np.diff(self.values))) if len(self.values) > 1 else 0.0


@dataclass(frozen=True)
class CalibrationTarget:
    """Tagged union over the four calibration modes."""

    mode: str  # cost | historical | rate | loss
    c_fp: float | None = None
    c_fn: float | None = None
    delta_hist: float | None = None
    r_target: float | None = None

    def __post_init__(self):
        if self.mode == "cost" or self.mode == "loss":
            if self.c_fp is None or self.c_fn is None or self.c_fp <= 0 or self.c_fn <= 0:
                raise NonpositiveCostError("cost calibration requires positive costs")
        elif self.mode == "historical":
            if self.delta_hist is None or not 0.0 < self.delta_hist < 1.0:
                raise ValueError("historical calibration requires delta_hist in (0, 1)")
        elif self.mode == "rate":
            if self.r_target is None or not 0.0 < self.r_target < 1.0:
                raise ValueError("rate calibration requires r_target in (0, 1)")
        else:
            raise ValueError(f"unknown calibration mode {self.mode!r}")


@dataclass(frozen=True)
class CalibrationResult:
    mode: str
    alpha_hat: float
    induced_delta: float | None
    objective: float
    edge_solution: bool
    induced_rate: float | None = None
    delta_loss: float | None = None

    @property
    def flags(self) -> list[str]:
        return ["edge_solution"] if self.edge_solution else []


def calibrate_cost(c_fp: float, c_fn: float) -> float:
    """Closed-form policy parameter c_fp / (c_fp + c_fn); no data needed."""
    if c_fp <= 0 or c_fn <= 0:
        raise NonpositiveCostError(f"costs must be positive, got ({c_fp}, {c_fn})")
    return c_fp / (c_fp + c_fn)


def _as_path(samples) -> ThresholdPath:
    if isinstance(samples, ThresholdPath):
        return samples
    return build_path(samples)


def induced_thresholds(path: ThresholdPath, grid: AlphaGrid):
    """delta*(alpha) and its path index for every grid point."""
    deltas = np.empty(len(grid.values))
    indices = np.empty(len(grid.values), dtype=np.int64)
    for i, a in enumerate(grid.values):
        opt = optimize(path, MetricSpec.res(float(a)))
        deltas[i] = opt.delta
        indices[i] = opt.path_index
    return deltas, indices


def _grid_argmin(objective: np.ndarray) -> int:
    # ties toward the smaller parameter: first index achieving the minimum
    return int(np.argmin(objective))


def calibrate_historical(samples, delta_hist: float,
                         grid: AlphaGrid | None = None) -> CalibrationResult:
    """Pick the grid parameter whose induced threshold is closest to a legacy
    cutoff. Edge solutions signal an unattainable target."""
    if not 0.0 < delta_hist < 1.0:
        raise ValueError("delta_hist must lie in (0, 1)")
    grid = grid or AlphaGrid.default()
    path = _as_path(samples)
    deltas, _ = induced_thresholds(path, grid)
    objective = np.abs(deltas - delta_hist)
    i = _grid_argmin(objective)
    return CalibrationResult(
        mode="historical",
        alpha_hat=float(grid.values[i]),
        induced_delta=float(deltas[i]),
        objective=float(objective[i]),
        edge_solution=i == 0 or i == len(grid.values) - 1,
    )


def calibrate_rate(samples, r_target: float,
                   grid: AlphaGrid | None = None) -> CalibrationResult:
    """Pick the grid parameter whose induced alarm rate (weighted share of
    samples at or above the induced threshold) is closest to the capacity."""
    if not 0.0 < r_target < 1.0:
        raise ValueError("r_target must lie in (0, 1)")
    grid = grid or AlphaGrid.default()
    path = _as_path(samples)
    deltas, indices = induced_thresholds(path, grid)
    rates = np.array([alarm_rate_at(path, int(k)) for k in indices])
    objective = np.abs(rates - r_target)
    i = _grid_argmin(objective)
    return CalibrationResult(
        mode="rate",
        alpha_hat=float(grid.values[i]),
        induced_delta=float(deltas[i]),
        objective=float(objective[i]),
        edge_solution=i == 0 or i == len(grid.values) - 1,
        induced_rate=float(rates[i]),
    )


def calibrate_loss(samples, c_fp: float, c_fn: float,
                   grid: AlphaGrid | None = None) -> CalibrationResult:
    """Match the threshold minimizing c_fn*(1-TPR) + c_fp*FPR over the path."""
    if c_fp <= 0 or c_fn <= 0:
        raise NonpositiveCostError(f"costs must be positive, got ({c_fp}, {c_fn})")
    grid = grid or AlphaGrid.default()
    path = _as_path(samples)
    loss_opt = optimize(path, MetricSpec.cost_loss(c_fp, c_fn))
    deltas, _ = induced_thresholds(path, grid)
    objective = np.abs(deltas - loss_opt.delta)
    i = _grid_argmin(objective)
    return CalibrationResult(
        mode="loss",
        alpha_hat=float(grid.values[i]),
        induced_delta=float(deltas[i]),
        objective=float(objective[i]),
        edge_solution=i == 0 or i == len(grid.values) - 1,
        delta_loss=loss_opt.delta,
    )


def calibrate(samples, target: CalibrationTarget,
              grid: AlphaGrid | None = None) -> CalibrationResult:
    """Dispatch over CalibrationTarget modes."""
    if target.mode == "cost":
        alpha = calibrate_cost(target.c_fp, target.c_fn)
        return CalibrationResult(mode="cost", alpha_hat=alpha, induced_delta=None,
                                 objective=0.0, edge_solution=False)
    if target.mode == "historical":
        return calibrate_historical(samples, target.delta_hist, grid)
    if target.mode == "rate":
        return calibrate_rate(samples, target.r_target, grid)
    return calibrate_loss(samples, target.c_fp, target.c_fn, grid)

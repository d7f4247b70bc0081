"""Seeded, weighted rare-event sample generation from Beta signal regimes.

Negatives beyond the memory cap are represented by a capped draw carrying
weight n_neg_required / n_cap, so weighted counts stay unbiased for the full
population (the capped and uncapped cases share one code path when the
required count fits under the cap).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidPrevalenceError
from .metrics import WeightedSample

N_CAP_DEFAULT = 2_000_000

PREVALENCE_GRID = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6)

# boundary prevalence where the positive-count rule switches from 100 to 20
_N_POS_BOUNDARY_PI = 1e-5


@dataclass(frozen=True)
class BetaRegime:
    """Pair of Beta score distributions: positives ~ Beta(a1, b1), negatives
    ~ Beta(a0, b0)."""

    a1: float
    b1: float
    a0: float
    b0: float
    name: str = ""

    def __post_init__(self):
        if min(self.a1, self.b1, self.a0, self.b0) <= 0:
            raise ValueError("Beta shape parameters must be positive")


MODERATE = BetaRegime(5, 3, 2, 8, name="moderate")
STRONG = BetaRegime(8, 2, 1, 12, name="strong")

_REGIMES = {"moderate": MODERATE, "strong": STRONG}


def regime_by_name(name: str) -> BetaRegime:
    try:
        return _REGIMES[name.strip().lower()]
    except KeyError:
        raise ValueError(f"unknown regime {name!r}; expected moderate or strong") from None


@dataclass(frozen=True)
class SamplePlan:
    """Positive/negative counts and the negative weight implied by the cap."""

    pi: float
    n_pos: int
    n_neg_sim: int
    w_neg: float
    n_neg_required: int


def plan_sample(pi: float, n_pos: int, n_cap: int = N_CAP_DEFAULT) -> SamplePlan:
    """Resolve counts and weights for a target prevalence under a memory cap.

    n_neg_required = round(n_pos * (1 - pi) / pi), rounded half to even.
    """
    if not 0.0 < pi < 1.0:
        raise InvalidPrevalenceError(f"prevalence {pi} outside (0, 1)")
    if n_pos < 1:
        raise ValueError("n_pos must be >= 1")
    if n_cap < 1:
        raise ValueError("n_cap must be >= 1")
    n_req = round(n_pos * (1.0 - pi) / pi)
    if n_req <= n_cap:
        return SamplePlan(pi=pi, n_pos=n_pos, n_neg_sim=n_req, w_neg=1.0, n_neg_required=n_req)
    return SamplePlan(
        pi=pi,
        n_pos=n_pos,
        n_neg_sim=n_cap,
        w_neg=n_req / n_cap,
        n_neg_required=n_req,
    )


def positives_for_prevalence(pi: float, n_pos_at_boundary: int = 20) -> int:
    """Positive count per replication: 100 above the boundary prevalence,
    20 below it; the boundary itself is configurable (default 20)."""
    if pi > _N_POS_BOUNDARY_PI:
        return 100
    if pi < _N_POS_BOUNDARY_PI:
        return 20
    return n_pos_at_boundary


def prevalence_grid() -> list[float]:
    """The five-decade prevalence grid, 1e-2 down to 1e-6."""
    return list(PREVALENCE_GRID)


def draw_regime_arrays(regime: BetaRegime, plan: SamplePlan, seed):
    """Draw (scores, labels, weights) arrays: positives first, then negatives.

    Deterministic given (regime, plan, seed); seed may be an int or a
    numpy SeedSequence.
    """
    rng = np.random.default_rng(seed)
    pos_scores = rng.beta(regime.a1, regime.b1, plan.n_pos)
    neg_scores = rng.beta(regime.a0, regime.b0, plan.n_neg_sim)
    scores = np.concatenate((pos_scores, neg_scores))
    labels = np.concatenate(
        (np.ones(plan.n_pos, dtype=np.int64), np.zeros(plan.n_neg_sim, dtype=np.int64))
    )
    weights = np.concatenate(
        (np.ones(plan.n_pos), np.full(plan.n_neg_sim, plan.w_neg))
    )
    return scores, labels, weights


def draw_regime(regime: BetaRegime, plan: SamplePlan, seed) -> list[WeightedSample]:
    """Like :func:`draw_regime_arrays` but materialized as WeightedSample records."""
    scores, labels, weights = draw_regime_arrays(regime, plan, seed)
    return [
        WeightedSample(float(s), int(l), float(w))
        for s, l, w in zip(scores, labels, weights)
    ]


def replication_seed(master_seed: int, regime_index: int, prevalence_index: int,
                     replication_index: int) -> np.random.SeedSequence:
    """Derived per-replication seed; replications fan out independently."""
    return np.random.SeedSequence(
        master_seed, spawn_key=(regime_index, prevalence_index, replication_index)
    )

"""Threshold-path construction, metric evaluation, optimization, AUC."""

import numpy as np
import pytest

import resmetrics as rm
from resmetrics import MetricSpec, WeightedSample

from bruteforce import (
    all_specs,
    brute_auc,
    brute_optimize,
    random_instance,
    values_at_cuts,
)

FOUR = [
    WeightedSample(0.9, 1),
    WeightedSample(0.8, 0),
    WeightedSample(0.7, 1),
    WeightedSample(0.1, 0),
]


def perfect_separation(n_pos=5, n_neg=7):
    samples = [WeightedSample(0.6 + 0.05 * i, 1) for i in range(n_pos)]
    samples += [WeightedSample(0.05 * i / n_neg + 0.1, 0) for i in range(n_neg)]
    return samples


# ---------------------------------------------------------------------------
# build_path
# ---------------------------------------------------------------------------

def test_build_path_four_sample():
    p = rm.build_path(FOUR)
    assert p.thresholds.tolist() == [0.9, 0.8, 0.7, 0.1]
    assert p.cum_tp.tolist() == [1.0, 1.0, 2.0, 2.0]
    assert p.cum_fp.tolist() == [0.0, 1.0, 1.0, 2.0]
    assert p.total_pos == 2.0 and p.total_neg == 2.0


def test_build_path_tie_merge():
    p = rm.build_path([WeightedSample(0.5, 1), WeightedSample(0.5, 0)])
    assert len(p) == 1
    assert p.cum_tp.tolist() == [1.0] and p.cum_fp.tolist() == [1.0]


def test_build_path_capped_weights_bottom_mass():
    # capped negatives at the most extreme prevalence: 20 positives and
    # 2e6 negatives at weight 19,999,980 / 2,000,000
    plan = rm.plan_sample(1e-6, 20, 2_000_000)
    assert plan.n_neg_required == 19_999_980
    n_neg = 1000  # scaled-down draw shares the weight; mass scales linearly
    w = plan.w_neg
    scores = np.concatenate((np.full(20, 0.9), np.linspace(0.0, 0.5, n_neg)))
    labels = np.concatenate((np.ones(20, np.int64), np.zeros(n_neg, np.int64)))
    weights = np.concatenate((np.ones(20), np.full(n_neg, w)))
    p = rm.build_path_arrays(scores, labels, weights)
    assert p.total_neg == pytest.approx(n_neg * w, rel=1e-12)
    # full-size product is exactly the required negative count
    assert plan.n_neg_sim * plan.w_neg == float(plan.n_neg_required)


def test_build_path_invariants_random():
    rng = np.random.default_rng(7)
    for _ in range(50):
        scores, labels, weights = random_instance(rng, tie_heavy=True)
        p = rm.build_path_arrays(scores, labels, weights)
        assert (np.diff(p.thresholds) < 0).all()
        assert (np.diff(p.cum_tp) >= 0).all()
        assert (np.diff(p.cum_fp) >= 0).all()
        assert p.cum_tp[-1] == p.total_pos
        assert p.cum_fp[-1] == p.total_neg
        assert len(np.unique(p.thresholds)) == len(p)


def test_build_path_empty_class():
    with pytest.raises(rm.EmptyClassError):
        rm.build_path([WeightedSample(0.4, 1), WeightedSample(0.6, 1)])
    with pytest.raises(rm.EmptyClassError):
        rm.build_path([WeightedSample(0.4, 0)])
    with pytest.raises(rm.EmptyClassError):
        rm.build_path([])


def test_weighted_sample_validation():
    with pytest.raises(ValueError):
        WeightedSample(1.5, 1)
    with pytest.raises(ValueError):
        WeightedSample(0.5, 2)
    with pytest.raises(ValueError):
        WeightedSample(0.5, 1, 0.0)
    with pytest.raises(ValueError):
        WeightedSample(0.5, 1, -1.0)


# ---------------------------------------------------------------------------
# rates_at
# ---------------------------------------------------------------------------

def test_rates_at_examples():
    p = rm.build_path(FOUR)
    r0 = rm.rates_at(p, 0)
    assert r0.tpr == 0.5 and r0.fpr == 0.0 and r0.tnr == 1.0
    sent = rm.rates_at(p, rm.SENTINEL_INDEX)
    assert sent.tpr == 0.0 and sent.fpr == 0.0
    assert sent.precision is None
    last = rm.rates_at(p, len(p) - 1)
    assert last.tpr == 1.0 and last.fpr == 1.0
    with pytest.raises(rm.IndexOutOfRangeError):
        rm.rates_at(p, len(p))
    with pytest.raises(rm.IndexOutOfRangeError):
        rm.rates_at(p, -2)


def test_rates_identities_random():
    rng = np.random.default_rng(3)
    scores, labels, weights = random_instance(rng)
    p = rm.build_path_arrays(scores, labels, weights)
    for i in range(-1, len(p)):
        r = rm.rates_at(p, i)
        assert r.tpr == r.tp_w / p.total_pos
        assert r.fpr == r.fp_w / p.total_neg
        assert r.tnr == 1.0 - r.fpr
        if r.precision is not None:
            assert 0.0 <= r.precision <= 1.0


# ---------------------------------------------------------------------------
# metric_at
# ---------------------------------------------------------------------------

def test_metric_at_examples():
    sep = rm.build_path(perfect_separation())
    # separating cut: lowest positive score, tpr=1 fpr=0
    i = int(np.nonzero(sep.cum_tp == sep.total_pos)[0][0])
    assert rm.metric_at(sep, i, MetricSpec.res(0.5)) == pytest.approx(2.0)
    p = rm.build_path(FOUR)
    for alpha in (0.1, 0.25, 0.5, 0.9):
        assert rm.metric_at(p, len(p) - 1, MetricSpec.res(alpha)) == pytest.approx(1.0)
    assert rm.metric_at(p, rm.SENTINEL_INDEX, MetricSpec.f1()) == 0.0
    # gamma = 1 reduces the generalized family to the base metric
    for i in range(-1, len(p)):
        assert rm.metric_at(p, i, MetricSpec.gen_res(0.5, 1.0)) == pytest.approx(
            rm.metric_at(p, i, MetricSpec.res(0.5)), rel=1e-15
        )
    with pytest.raises(rm.NotThresholdMetricError):
        rm.metric_at(p, 0, MetricSpec.auc())


def test_metric_spec_validation():
    with pytest.raises(ValueError):
        MetricSpec.res(0.0)
    with pytest.raises(ValueError):
        MetricSpec.res(1.0)
    with pytest.raises(ValueError):
        MetricSpec.fbeta(0.0)
    with pytest.raises(ValueError):
        MetricSpec.gen_res(0.5, 0.0)
    with pytest.raises(ValueError):
        MetricSpec.cost_loss(0.0, 1.0)
    with pytest.raises(ValueError):
        MetricSpec("nope")


def test_parse_metric_spec():
    assert rm.parse_metric_spec("f1") == MetricSpec.f1()
    assert rm.parse_metric_spec("res:0.5") == MetricSpec.res(0.5)
    assert rm.parse_metric_spec("fbeta:2") == MetricSpec.fbeta(2.0)
    assert rm.parse_metric_spec("genres:0.5:2") == MetricSpec.gen_res(0.5, 2.0)
    assert rm.parse_metric_spec("costloss:1:20") == MetricSpec.cost_loss(1.0, 20.0)
    with pytest.raises(ValueError):
        rm.parse_metric_spec("res")


# ---------------------------------------------------------------------------
# metric_curve
# ---------------------------------------------------------------------------

def test_curve_final_node_res_is_one():
    rng = np.random.default_rng(11)
    for _ in range(10):
        scores, labels, weights = random_instance(rng)
        p = rm.build_path_arrays(scores, labels, weights)
        thr, vals = rm.metric_curve(p, MetricSpec.res(float(rng.uniform(0.05, 0.95))))
        assert thr[0] == 1.0 and len(vals) == len(p) + 1
        assert vals[-1] == pytest.approx(1.0)


def test_curve_matches_bruteforce_four_sample():
    scores = np.array([0.9, 0.8, 0.7, 0.1])
    labels = np.array([1, 0, 1, 0], dtype=np.int64)
    weights = np.ones(4)
    p = rm.build_path_arrays(scores, labels, weights)
    cuts, vals, sent = values_at_cuts(scores, labels, weights, MetricSpec.f1())
    thr, curve = rm.metric_curve(p, MetricSpec.f1())
    assert thr[1:].tolist() == cuts.tolist()
    assert curve[0] == sent
    assert curve[1:].tolist() == vals.tolist()


def test_curve_perfect_separation_maxima():
    p = rm.build_path(perfect_separation())
    for spec in (MetricSpec.f1(), MetricSpec.mcc(), MetricSpec.balanced_accuracy()):
        _, vals = rm.metric_curve(p, spec)
        assert vals.max() == pytest.approx(1.0)


# ---------------------------------------------------------------------------
# optimize
# ---------------------------------------------------------------------------

def test_optimize_perfect_separation():
    samples = perfect_separation()
    p = rm.build_path(samples)
    lowest_pos = min(s.score for s in samples if s.label == 1)
    for spec in (MetricSpec.f1(), MetricSpec.mcc(), MetricSpec.balanced_accuracy()):
        opt = rm.optimize(p, spec)
        assert opt.value == pytest.approx(1.0)
        assert opt.delta == pytest.approx(lowest_pos)


def test_optimize_matches_bruteforce_random():
    rng = np.random.default_rng(1234)
    for trial in range(60):
        scores, labels, weights = random_instance(rng, n_max=120, tie_heavy=trial % 2 == 0)
        p = rm.build_path_arrays(scores, labels, weights)
        for spec in all_specs():
            opt = rm.optimize(p, spec)
            b_delta, b_value, _ = brute_optimize(scores, labels, weights, spec)
            assert opt.value == b_value, (spec.key, trial)
            assert opt.delta == b_delta, (spec.key, trial)


def test_optimize_tie_smallest_threshold():
    # F1 ties exactly at 2/3 for the cut at 0.9 (tp=1, fp=0, fn=1) and the cut
    # at 0.7 (tp=2, fp=2, fn=0); the smaller threshold must win
    samples = [
        WeightedSample(0.9, 1),
        WeightedSample(0.8, 0),
        WeightedSample(0.75, 0),
        WeightedSample(0.7, 1),
    ]
    p = rm.build_path(samples)
    _, vals = rm.metric_curve(p, MetricSpec.f1())
    best = vals.max()
    tied = [i for i, v in enumerate(vals[1:]) if v == best]
    assert len(tied) >= 2  # fixture really does tie
    opt = rm.optimize(p, MetricSpec.f1())
    assert opt.path_index == tied[-1]
    assert opt.delta == float(p.thresholds[tied[-1]])


def test_optimize_rejects_auc():
    p = rm.build_path(FOUR)
    with pytest.raises(rm.NotThresholdMetricError):
        rm.optimize(p, MetricSpec.auc())


# ---------------------------------------------------------------------------
# auc
# ---------------------------------------------------------------------------

def test_auc_examples():
    assert rm.auc(rm.build_path(perfect_separation())) == pytest.approx(1.0)
    all_tied = [WeightedSample(0.3, 1), WeightedSample(0.3, 0), WeightedSample(0.3, 1)]
    assert rm.auc(rm.build_path(all_tied)) == pytest.approx(0.5)
    # pair enumeration on the 4-sample fixture: 3 wins out of 4 pairs
    p = rm.build_path(FOUR)
    scores = np.array([0.9, 0.8, 0.7, 0.1])
    labels = np.array([1, 0, 1, 0], dtype=np.int64)
    assert brute_auc(scores, labels, np.ones(4)) == pytest.approx(0.75)
    assert rm.auc(p) == pytest.approx(0.75)


def test_auc_matches_pair_enumeration_random():
    rng = np.random.default_rng(99)
    for trial in range(40):
        scores, labels, weights = random_instance(rng, n_max=60, tie_heavy=trial % 2 == 0)
        p = rm.build_path_arrays(scores, labels, weights)
        assert rm.auc(p) == pytest.approx(
            brute_auc(scores, labels, weights), rel=1e-12
        )


def test_auc_monotone_transform_invariant():
    rng = np.random.default_rng(5)
    scores, labels, weights = random_instance(rng)
    a1 = rm.auc(rm.build_path_arrays(scores, labels, weights))
    a2 = rm.auc(rm.build_path_arrays(scores * scores, labels, weights))
    assert a1 == a2


# ---------------------------------------------------------------------------
# spec invariants
# ---------------------------------------------------------------------------

def test_weight_coherence_duplicate_equals_double():
    rng = np.random.default_rng(21)
    scores, labels, weights = random_instance(rng, n_max=40, tie_heavy=True)
    dup_i = 2
    s_dup = np.append(scores, scores[dup_i])
    l_dup = np.append(labels, labels[dup_i])
    w_dup = np.append(weights, weights[dup_i])
    w_double = weights.copy()
    w_double[dup_i] *= 2.0
    p1 = rm.build_path_arrays(s_dup, l_dup, w_dup)
    p2 = rm.build_path_arrays(scores, labels, w_double)
    for spec in all_specs():
        t1, v1 = rm.metric_curve(p1, spec)
        t2, v2 = rm.metric_curve(p2, spec)
        assert t1.tolist() == t2.tolist()
        assert v1.tolist() == v2.tolist()


def test_scale_invariance_of_optimizer():
    rng = np.random.default_rng(22)
    scores, labels, weights = random_instance(rng, n_max=80)
    p1 = rm.build_path_arrays(scores, labels, weights)
    for c in (2.0, 3.0, 10.0, 0.5):
        p2 = rm.build_path_arrays(scores, labels, weights * c)
        for i in (-1, 0, len(p1) // 2, len(p1) - 1):
            r1, r2 = rm.rates_at(p1, i), rm.rates_at(p2, i)
            assert r1.tpr == r2.tpr and r1.fpr == r2.fpr
        for spec in all_specs():
            o1, o2 = rm.optimize(p1, spec), rm.optimize(p2, spec)
            assert o1.delta == o2.delta
            assert o1.value == o2.value


def test_res_boundedness():
    rng = np.random.default_rng(23)
    for _ in range(20):
        scores, labels, weights = random_instance(rng, n_max=60)
        p = rm.build_path_arrays(scores, labels, weights)
        for alpha in (0.1, 0.5, 0.9):
            _, vals = rm.metric_curve(p, MetricSpec.res(alpha))
            assert vals.min() >= 0.0
            assert vals.max() <= 1.0 / (1.0 - alpha) + 1e-12
    # equality exactly at tpr=1, fpr=0
    sep = rm.build_path(perfect_separation())
    opt = rm.optimize(sep, MetricSpec.res(0.5))
    assert opt.value == pytest.approx(2.0)


def test_costloss_equal_costs_matches_balanced_accuracy_cut():
    # power-of-two class sizes keep every rate dyadic, so exact ties coincide
    rng = np.random.default_rng(24)
    for _ in range(20):
        n_pos, n_neg = 16, 32
        scores = rng.integers(0, 30, n_pos + n_neg) / 32.0
        labels = np.concatenate((np.ones(n_pos, np.int64), np.zeros(n_neg, np.int64)))
        weights = np.ones(n_pos + n_neg)
        p = rm.build_path_arrays(scores, labels, weights)
        o_loss = rm.optimize(p, MetricSpec.cost_loss(1.0, 1.0))
        o_ba = rm.optimize(p, MetricSpec.balanced_accuracy())
        assert o_loss.delta == o_ba.delta
        assert o_loss.path_index == o_ba.path_index


def test_value_equals_metric_at_optimum():
    rng = np.random.default_rng(25)
    scores, labels, weights = random_instance(rng)
    p = rm.build_path_arrays(scores, labels, weights)
    for spec in all_specs():
        opt = rm.optimize(p, spec)
        assert rm.metric_at(p, opt.path_index, spec) == opt.value


def test_path_immutable():
    p = rm.build_path(FOUR)
    with pytest.raises(ValueError):
        p.thresholds[0] = 0.5


# ---------------------------------------------------------------------------
# backend parity
# ---------------------------------------------------------------------------

def test_backend_parity():
    from resmetrics import _kernels_py

    try:
        from resmetrics import _kernels
    except ImportError:
        pytest.skip("compiled kernels not built")
    rng = np.random.default_rng(77)
    for trial in range(20):
        scores, labels, weights = random_instance(rng, n_max=150, tie_heavy=trial % 2 == 0)
        order = np.argsort(-scores, kind="stable")
        s = np.ascontiguousarray(scores[order])
        w = weights[order]
        pos = labels[order] == 1
        pw = np.ascontiguousarray(np.where(pos, w, 0.0))
        nw = np.ascontiguousarray(np.where(pos, 0.0, w))
        t1, a1, b1 = _kernels_py.merge_path(s, pw, nw)
        t2, a2, b2 = _kernels.merge_path(s, pw, nw)
        assert (t1 == t2).all() and (a1 == a2).all() and (b1 == b2).all()
        P, N = a1[-1], b1[-1]
        for code in range(8):
            aux = np.power(a1 / P, 2.0) if code == _kernels_py.GENRES else None
            v1 = _kernels_py.metric_values(a1, b1, P, N, code, 0.3, 2.0, aux)
            v2 = _kernels.metric_values(a2, b2, P, N, code, 0.3, 2.0, aux)
            assert (v1 == v2).all(), code
            assert _kernels_py.optimize_scan(
                a1, b1, P, N, code, 0.3, 2.0, aux
            ) == _kernels.optimize_scan(a2, b2, P, N, code, 0.3, 2.0, aux)
        assert _kernels_py.auc_from_path(a1, b1, P, N) == _kernels.auc_from_path(
            a2, b2, P, N
        )

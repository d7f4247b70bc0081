"""NumPy implementation of the threshold-path kernels.

This is the fallback backend; `_kernels.pyx` implements the same contract as a
compiled extension. Both backends must produce bit-identical results, so the
floating-point operation order here (sequential cumulative sums, explicit
parenthesisation) is part of the contract, not a style choice.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"

# metric codes shared with the compiled kernel
F1 = 0
FBETA = 1
BALANCED_ACCURACY = 2
ACCURACY = 3
MCC = 4
RES = 5
GENRES = 6
COSTLOSS = 7

_MINIMIZED = {COSTLOSS}


def merge_path(scores_desc, pos_w, neg_w):
    """Merge samples sorted by descending score into distinct-threshold nodes.

    `pos_w[i]`/`neg_w[i]` carry the sample weight if the i-th sorted sample is
    positive/negative and 0.0 otherwise. Returns (thresholds, cum_tp, cum_fp).
    """
    if scores_desc.shape[0] == 0:
        z = np.zeros(0)
        return z, z.copy(), z.copy()
    last = np.empty(scores_desc.shape[0], dtype=bool)
    np.not_equal(scores_desc[1:], scores_desc[:-1], out=last[:-1])
    last[-1] = True
    cum_tp = np.cumsum(pos_w)[last]
    cum_fp = np.cumsum(neg_w)[last]
    return np.ascontiguousarray(scores_desc[last]), cum_tp, cum_fp


def metric_values(cum_tp, cum_fp, total_pos, total_neg, code, p1, p2, aux=None):
    """Metric value at every path node (sentinel excluded)."""
    tp = cum_tp
    fp = cum_fp
    if code == F1:
        return (2.0 * tp) / (2.0 * tp + fp + (total_pos - tp))
    if code == FBETA:
        b2 = p1 * p1
        return ((1.0 + b2) * tp) / ((1.0 + b2) * tp + fp + b2 * (total_pos - tp))
    if code == BALANCED_ACCURACY:
        return 0.5 * (tp / total_pos + (1.0 - fp / total_neg))
    if code == ACCURACY:
        return (tp + (total_neg - fp)) / (total_pos + total_neg)
    if code == MCC:
        fn = total_pos - tp
        tn = total_neg - fp
        den2 = ((tp + fp) * (tp + fn)) * ((tn + fp) * (tn + fn))
        num = tp * tn - fp * fn
        out = np.zeros_like(tp)
        ok = den2 > 0.0
        out[ok] = num[ok] / np.sqrt(den2[ok])
        return out
    if code == RES:
        return (tp / total_pos) / (p1 * (fp / total_neg) + (1.0 - p1))
    if code == GENRES:
        return aux / (p1 * (fp / total_neg) + (1.0 - p1))
    if code == COSTLOSS:
        return p2 * (1.0 - tp / total_pos) + p1 * (fp / total_neg)
    raise ValueError(f"unknown metric code {code}")


def sentinel_value(total_pos, total_neg, code, p1, p2):
    """Metric value at the never-alarm candidate (tp = fp = 0)."""
    if code == F1 or code == FBETA or code == RES or code == GENRES or code == MCC:
        return 0.0
    if code == BALANCED_ACCURACY:
        return 0.5
    if code == ACCURACY:
        return total_neg / (total_pos + total_neg)
    if code == COSTLOSS:
        return p2
    raise ValueError(f"unknown metric code {code}")


def optimize_scan(cum_tp, cum_fp, total_pos, total_neg, code, p1, p2, aux=None):
    """Best (index, value) over the sentinel plus all nodes.

    Index -1 denotes the never-alarm sentinel. Ties on exactly equal values are
    broken toward the smallest threshold, i.e. the largest node index.
    """
    sent = sentinel_value(total_pos, total_neg, code, p1, p2)
    vals = metric_values(cum_tp, cum_fp, total_pos, total_neg, code, p1, p2, aux)
    minimize = code in _MINIMIZED
    if vals.shape[0] == 0:
        return -1, sent
    node_best = vals.min() if minimize else vals.max()
    best = min(sent, node_best) if minimize else max(sent, node_best)
    hits = np.nonzero(vals == best)[0]
    if hits.shape[0]:
        return int(hits[-1]), float(best)
    return -1, float(best)


def auc_from_path(cum_tp, cum_fp, total_pos, total_neg):
    """Trapezoidal ROC area over the path; equals the weighted Mann-Whitney
    statistic with ties counted at half weight."""
    tpr = cum_tp / total_pos
    fpr = cum_fp / total_neg
    prev_tpr = np.concatenate(([0.0], tpr[:-1]))
    prev_fpr = np.concatenate(([0.0], fpr[:-1]))
    terms = (fpr - prev_fpr) * (tpr + prev_tpr) * 0.5
    if terms.shape[0] == 0:
        return 0.0
    return float(np.cumsum(terms)[-1])

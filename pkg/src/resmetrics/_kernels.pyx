# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled threshold-path kernels.

Mirrors `_kernels_py` operation for operation; the floating-point evaluation
order is identical so both backends return bit-equal results.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

BACKEND_NAME = "c"

F1 = 0
FBETA = 1
BALANCED_ACCURACY = 2
ACCURACY = 3
MCC = 4
RES = 5
GENRES = 6
COSTLOSS = 7

DEF _F1 = 0
DEF _FBETA = 1
DEF _BA = 2
DEF _ACC = 3
DEF _MCC = 4
DEF _RES = 5
DEF _GENRES = 6
DEF _COSTLOSS = 7


def merge_path(const double[::1] scores_desc, const double[::1] pos_w, const double[::1] neg_w):
    cdef Py_ssize_t n = scores_desc.shape[0]
    cdef Py_ssize_t i, m, j
    if n == 0:
        z = np.zeros(0)
        return z, z.copy(), z.copy()
    m = 1
    for i in range(1, n):
        if scores_desc[i] != scores_desc[i - 1]:
            m += 1
    thr_arr = np.empty(m)
    tp_arr = np.empty(m)
    fp_arr = np.empty(m)
    cdef double[::1] thr = thr_arr
    cdef double[::1] tp = tp_arr
    cdef double[::1] fp = fp_arr
    cdef double acc_tp = 0.0, acc_fp = 0.0
    j = 0
    for i in range(n):
        acc_tp = acc_tp + pos_w[i]
        acc_fp = acc_fp + neg_w[i]
        if i == n - 1 or scores_desc[i + 1] != scores_desc[i]:
            thr[j] = scores_desc[i]
            tp[j] = acc_tp
            fp[j] = acc_fp
            j += 1
    return thr_arr, tp_arr, fp_arr


cdef inline double _node_value(double tp, double fp, double P, double N,
                               int code, double p1, double p2, double aux) noexcept nogil:
    cdef double b2, fn, tn, den2, num
    if code == _F1:
        return (2.0 * tp) / (2.0 * tp + fp + (P - tp))
    if code == _FBETA:
        b2 = p1 * p1
        return ((1.0 + b2) * tp) / ((1.0 + b2) * tp + fp + b2 * (P - tp))
    if code == _BA:
        return 0.5 * (tp / P + (1.0 - fp / N))
    if code == _ACC:
        return (tp + (N - fp)) / (P + N)
    if code == _MCC:
        fn = P - tp
        tn = N - fp
        den2 = ((tp + fp) * (tp + fn)) * ((tn + fp) * (tn + fn))
        if den2 > 0.0:
            num = tp * tn - fp * fn
            return num / sqrt(den2)
        return 0.0
    if code == _RES:
        return (tp / P) / (p1 * (fp / N) + (1.0 - p1))
    if code == _GENRES:
        return aux / (p1 * (fp / N) + (1.0 - p1))
    # _COSTLOSS
    return p2 * (1.0 - tp / P) + p1 * (fp / N)


def metric_values(const double[::1] cum_tp, const double[::1] cum_fp, double total_pos,
                  double total_neg, int code, double p1, double p2, aux=None):
    cdef Py_ssize_t m = cum_tp.shape[0]
    cdef Py_ssize_t k
    out_arr = np.empty(m)
    cdef double[::1] out = out_arr
    cdef const double[::1] auxv
    if code == _GENRES:
        auxv = aux
        for k in range(m):
            out[k] = _node_value(cum_tp[k], cum_fp[k], total_pos, total_neg,
                                 code, p1, p2, auxv[k])
    else:
        for k in range(m):
            out[k] = _node_value(cum_tp[k], cum_fp[k], total_pos, total_neg,
                                 code, p1, p2, 0.0)
    return out_arr


def sentinel_value(double total_pos, double total_neg, int code, double p1, double p2):
    if code == _F1 or code == _FBETA or code == _RES or code == _GENRES or code == _MCC:
        return 0.0
    if code == _BA:
        return 0.5
    if code == _ACC:
        return total_neg / (total_pos + total_neg)
    if code == _COSTLOSS:
        return p2
    raise ValueError(f"unknown metric code {code}")


def optimize_scan(const double[::1] cum_tp, const double[::1] cum_fp, double total_pos,
                  double total_neg, int code, double p1, double p2, aux=None):
    cdef Py_ssize_t m = cum_tp.shape[0]
    cdef Py_ssize_t k, best_i = -1
    cdef double best = sentinel_value(total_pos, total_neg, code, p1, p2)
    cdef double v
    cdef bint minimize = code == _COSTLOSS
    cdef const double[::1] auxv
    if code == _GENRES:
        auxv = aux
        for k in range(m):
            v = _node_value(cum_tp[k], cum_fp[k], total_pos, total_neg, code, p1, p2, auxv[k])
            if v >= best:
                best = v
                best_i = k
    elif minimize:
        for k in range(m):
            v = _node_value(cum_tp[k], cum_fp[k], total_pos, total_neg, code, p1, p2, 0.0)
            if v <= best:
                best = v
                best_i = k
    else:
        for k in range(m):
            v = _node_value(cum_tp[k], cum_fp[k], total_pos, total_neg, code, p1, p2, 0.0)
            if v >= best:
                best = v
                best_i = k
    return best_i, best


def auc_from_path(const double[::1] cum_tp, const double[::1] cum_fp, double total_pos, double total_neg):
    cdef Py_ssize_t m = cum_tp.shape[0]
    cdef Py_ssize_t k
    cdef double acc = 0.0
    cdef double prev_tpr = 0.0, prev_fpr = 0.0, tpr, fpr
    for k in range(m):
        tpr = cum_tp[k] / total_pos
        fpr = cum_fp[k] / total_neg
        acc = acc + (fpr - prev_fpr) * (tpr + prev_tpr) * 0.5
        prev_tpr = tpr
        prev_fpr = fpr
    return acc

"""Hot numeric kernels for histogram gradient boosting.

Two interchangeable backends: numba-compiled loops (default) and pure
numpy. Set DEPDETECT_NO_NUMBA=1 to force the numpy path; both must
produce bit-identical results. Bin 0 is always the dedicated zero bin.
"""

from __future__ import annotations

import os

import numpy as np

USE_NUMBA = os.environ.get("DEPDETECT_NO_NUMBA", "") not in ("1", "true", "yes")

if USE_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover
        USE_NUMBA = False

NEG_INF = -np.inf


# ---------------------------------------------------------------- histograms

def _leaf_histograms_loops(binned, rows, grad, hess, n_bins):
    n_features = binned.shape[1]
    hg = np.zeros((n_features, n_bins))
    hh = np.zeros((n_features, n_bins))
    hc = np.zeros((n_features, n_bins), dtype=np.int64)
    for k in range(rows.shape[0]):
        r = rows[k]
        g = grad[r]
        h = hess[r]
        for j in range(n_features):
            b = binned[r, j]
            hg[j, b] += g
            hh[j, b] += h
            hc[j, b] += 1
    return hg, hh, hc


def _leaf_histograms_numpy(binned, rows, grad, hess, n_bins):
    n_features = binned.shape[1]
    hg = np.zeros((n_features, n_bins))
    hh = np.zeros((n_features, n_bins))
    hc = np.zeros((n_features, n_bins), dtype=np.int64)
    g = grad[rows]
    h = hess[rows]
    sub = binned[rows]
    for j in range(n_features):
        bc = sub[:, j]
        hg[j] = np.bincount(bc, weights=g, minlength=n_bins)
        hh[j] = np.bincount(bc, weights=h, minlength=n_bins)
        hc[j] = np.bincount(bc, minlength=n_bins)
    return hg, hh, hc


# --------------------------------------------------------------- split scan

def _scan_splits_loops(hg, hh, hc, n_nonzero_bins, min_child, lam):
    """Best split per feature from its histogram.

    Candidate s = number of nonzero-value bins routed left (0..m-1); the
    zero bin goes with the direction that maximizes gain, left preferred
    on exact ties. Returns (gain, s, zero_left) per feature; gain is
    -inf when no candidate satisfies the child-size constraint.
    """
    n_features = hg.shape[0]
    best_gain = np.full(n_features, NEG_INF)
    best_s = np.zeros(n_features, dtype=np.int64)
    best_zero_left = np.zeros(n_features, dtype=np.int8)
    for j in range(n_features):
        m = n_nonzero_bins[j]
        g0 = hg[j, 0]
        h0 = hh[j, 0]
        c0 = hc[j, 0]
        gt = g0
        ht = h0
        ct = c0
        for b in range(1, m + 1):
            gt += hg[j, b]
            ht += hh[j, b]
            ct += hc[j, b]
        parent = gt * gt / (ht + lam)
        cg = 0.0
        ch = 0.0
        cc = 0
        for s in range(0, m):
            if s > 0:
                cg += hg[j, s]
                ch += hh[j, s]
                cc += hc[j, s]
            for opt in range(2):
                zero_left = opt == 0
                if not zero_left and c0 == 0:
                    continue  # identical partition to zero_left
                if s == 0 and (not zero_left or c0 == 0):
                    continue  # empty left child
                gl = cg + (g0 if zero_left else 0.0)
                hl = ch + (h0 if zero_left else 0.0)
                cl = cc + (c0 if zero_left else 0)
                cr = ct - cl
                if cl < min_child or cr < min_child:
                    continue
                gr = gt - gl
                hr = ht - hl
                gain = gl * gl / (hl + lam) + gr * gr / (hr + lam) - parent
                if gain > best_gain[j]:
                    best_gain[j] = gain
                    best_s[j] = s
                    best_zero_left[j] = 1 if zero_left else 0
    return best_gain, best_s, best_zero_left


def _scan_splits_numpy(hg, hh, hc, n_nonzero_bins, min_child, lam):
    n_features, n_bins = hg.shape
    max_s = n_bins - 1  # s in 0..m-1
    if max_s == 0:
        return (
            np.full(n_features, NEG_INF),
            np.zeros(n_features, dtype=np.int64),
            np.zeros(n_features, dtype=np.int8),
        )
    g0 = hg[:, 0:1]
    h0 = hh[:, 0:1]
    c0 = hc[:, 0:1]

    # cumulative sums over nonzero bins; column s holds bins 1..s going left
    cg = np.concatenate([np.zeros((n_features, 1)), np.cumsum(hg[:, 1:], axis=1)], axis=1)
    ch = np.concatenate([np.zeros((n_features, 1)), np.cumsum(hh[:, 1:], axis=1)], axis=1)
    cc = np.concatenate(
        [np.zeros((n_features, 1), dtype=np.int64), np.cumsum(hc[:, 1:], axis=1)], axis=1
    )
    cg = cg[:, :max_s]
    ch = ch[:, :max_s]
    cc = cc[:, :max_s]

    m = n_nonzero_bins[:, None]
    gt = g0 + np.sum(hg[:, 1:], axis=1, keepdims=True)
    ht = h0 + np.sum(hh[:, 1:], axis=1, keepdims=True)
    ct = c0 + np.sum(hc[:, 1:], axis=1, keepdims=True)
    parent = gt * gt / (ht + lam)
    s_idx = np.arange(max_s)[None, :]
    in_range = s_idx < m

    def gains(zero_left):
        gl = cg + (g0 if zero_left else 0.0)
        hl = ch + (h0 if zero_left else 0.0)
        cl = cc + (c0 if zero_left else 0)
        cr = ct - cl
        gr = gt - gl
        hr = ht - hl
        gain = gl * gl / (hl + lam) + gr * gr / (hr + lam) - parent
        valid = in_range & (cl >= min_child) & (cr >= min_child)
        if zero_left:
            valid &= (s_idx > 0) | (c0 > 0)
        else:
            valid &= (c0 > 0) & (s_idx > 0)
        return np.where(valid, gain, NEG_INF)

    gain_zl = gains(True)
    gain_zr = gains(False)
    take_zr = gain_zr > gain_zl  # strict: left preferred on ties
    gain = np.where(take_zr, gain_zr, gain_zl)
    best_s = np.argmax(gain, axis=1)  # first max: lowest s wins ties
    rows = np.arange(n_features)
    best_gain = gain[rows, best_s]
    best_zero_left = np.where(take_zr[rows, best_s], 0, 1).astype(np.int8)
    return best_gain, best_s.astype(np.int64), best_zero_left


# --------------------------------------------------------------- prediction

def _predict_tree_loops(feature, threshold, default_left, left, right, value, is_leaf, X):
    n = X.shape[0]
    out = np.empty(n)
    for i in range(n):
        node = 0
        while is_leaf[node] == 0:
            v = X[i, feature[node]]
            if v == 0.0:
                node = left[node] if default_left[node] == 1 else right[node]
            elif v <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = value[node]
    return out


def _predict_tree_numpy(feature, threshold, default_left, left, right, value, is_leaf, X):
    n = X.shape[0]
    node = np.zeros(n, dtype=np.int64)
    active = is_leaf[node] == 0
    while np.any(active):
        idx = np.nonzero(active)[0]
        cur = node[idx]
        v = X[idx, feature[cur]]
        go_left = np.where(v == 0.0, default_left[cur] == 1, v <= threshold[cur])
        node[idx] = np.where(go_left, left[cur], right[cur])
        active[idx] = is_leaf[node[idx]] == 0
    return value[node]


if USE_NUMBA:
    leaf_histograms = njit(cache=True)(_leaf_histograms_loops)
    scan_splits = njit(cache=True)(_scan_splits_loops)
    predict_tree = njit(cache=True)(_predict_tree_loops)
else:
    leaf_histograms = _leaf_histograms_numpy
    scan_splits = _scan_splits_numpy
    predict_tree = _predict_tree_numpy

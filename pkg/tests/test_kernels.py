"""Backend agreement: the numba loop kernels and the pure-numpy fallback
must make identical split decisions and near-identical gains."""

import numpy as np
import pytest

from depdetect.gbdt import kernels


def random_histograms(rng, n_features, n_bins):
    hg = rng.normal(size=(n_features, n_bins))
    hh = rng.uniform(0.01, 1.0, size=(n_features, n_bins))
    hc = rng.integers(0, 20, size=(n_features, n_bins))
    mask = hc == 0
    hg[mask] = 0.0
    hh[mask] = 0.0
    m = rng.integers(0, n_bins, size=n_features)
    for j in range(n_features):
        hg[j, m[j] + 1 :] = 0.0
        hh[j, m[j] + 1 :] = 0.0
        hc[j, m[j] + 1 :] = 0
    return hg, hh, hc.astype(np.int64), m.astype(np.int64)


def test_histogram_backends_agree():
    rng = np.random.default_rng(0)
    binned = rng.integers(0, 12, size=(200, 7)).astype(np.int32)
    rows = np.sort(rng.choice(200, size=120, replace=False)).astype(np.int64)
    grad = rng.normal(size=200)
    hess = rng.uniform(0.01, 1, size=200)
    a = kernels._leaf_histograms_loops(binned, rows, grad, hess, 12)
    b = kernels._leaf_histograms_numpy(binned, rows, grad, hess, 12)
    for x, y in zip(a, b):
        assert np.allclose(x, y, atol=1e-12)


def test_scan_backends_agree():
    rng = np.random.default_rng(1)
    for trial in range(20):
        hg, hh, hc, m = random_histograms(rng, 10, 9)
        for min_child in (1, 5):
            ga, sa, za = kernels._scan_splits_loops(hg, hh, hc, m, min_child, 1.0)
            gb, sb, zb = kernels._scan_splits_numpy(hg, hh, hc, m, min_child, 1.0)
            finite = np.isfinite(ga)
            assert np.array_equal(finite, np.isfinite(gb))
            assert np.allclose(ga[finite], gb[finite], rtol=1e-9)
            assert np.array_equal(sa[finite], sb[finite])
            assert np.array_equal(za[finite], zb[finite])


def test_predict_backends_agree():
    # small handmade tree: root splits feature 0 at 0.5, default left
    feature = np.array([0, -1, -1], dtype=np.int64)
    threshold = np.array([0.5, 0.0, 0.0])
    default_left = np.array([1, 1, 1], dtype=np.int8)
    left = np.array([1, -1, -1], dtype=np.int64)
    right = np.array([2, -1, -1], dtype=np.int64)
    value = np.array([0.0, -1.0, 2.0])
    is_leaf = np.array([0, 1, 1], dtype=np.int8)
    X = np.array([[0.0], [0.3], [0.7], [0.5]])
    args = (feature, threshold, default_left, left, right, value, is_leaf, X)
    a = kernels._predict_tree_loops(*args)
    b = kernels._predict_tree_numpy(*args)
    assert np.array_equal(a, b)
    assert np.array_equal(a, [-1.0, -1.0, 2.0, -1.0])


def test_zero_routed_by_default_direction():
    feature = np.array([0, -1, -1], dtype=np.int64)
    threshold = np.array([0.5, 0.0, 0.0])
    default_left = np.array([0, 1, 1], dtype=np.int8)  # zeros go right
    left = np.array([1, -1, -1], dtype=np.int64)
    right = np.array([2, -1, -1], dtype=np.int64)
    value = np.array([0.0, -1.0, 2.0])
    is_leaf = np.array([0, 1, 1], dtype=np.int8)
    X = np.array([[0.0], [0.4]])
    out = kernels._predict_tree_numpy(
        feature, threshold, default_left, left, right, value, is_leaf, X
    )
    assert np.array_equal(out, [2.0, -1.0])

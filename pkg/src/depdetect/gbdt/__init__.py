"""Histogram-based gradient boosted trees with per-feature gain accounting.

Leaf-wise growth bounded by a leaf budget, second-order split gain with
L2 leaf regularization, and a learned default direction for zero-valued
(sparse) features. Binary logistic and multiclass softmax objectives.
Training is fully deterministic: no subsampling, fixed traversal order
(features ascending, thresholds ascending), ties broken by first-seen.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from ..featurize import SparseMatrix, SparseVector


class TrainError(ValueError):
    pass


@dataclass(frozen=True)
class Hyperparams:
    num_rounds: int = 100
    learning_rate: float = 0.1
    max_leaves: int = 31
    min_samples_per_leaf: int = 20
    min_gain_to_split: float = 0.0
    histogram_bins: int = 255
    l2_reg: float = 1.0


@dataclass
class Tree:
    """Flat binary tree; children referenced by node index, root at 0."""

    feature: np.ndarray  # int64; -1 on leaves
    threshold: np.ndarray  # float64
    default_left: np.ndarray  # int8, routing for zero/missing values
    left: np.ndarray  # int64; -1 on leaves
    right: np.ndarray  # int64
    value: np.ndarray  # float64, leaf output (already shrunk)
    gain: np.ndarray  # float64, split gain; 0 on leaves
    is_leaf: np.ndarray  # int8

    @property
    def n_nodes(self):
        return len(self.feature)

    def predict(self, X):
        return kernels.predict_tree(
            self.feature, self.threshold, self.default_left,
            self.left, self.right, self.value, self.is_leaf, X,
        )


@dataclass
class GbdtModel:
    objective: str  # "binary-logistic" | "multiclass-softmax"
    class_names: list
    trees: list  # per round: [Tree] (binary) or [Tree per class]
    learning_rate: float
    base_score: np.ndarray  # per-class prior log-odds
    feature_dim: int
    hyperparams: Hyperparams
    gain_ledger: np.ndarray  # per-feature total split gain
    train_losses: list = field(default_factory=list)
    # training-time argmax predictions; not part of the serialized model
    train_class_indices: np.ndarray | None = None

    @property
    def num_classes(self):
        return len(self.class_names)


# ------------------------------------------------------------------ binning

@dataclass
class _BinMaps:
    binned: np.ndarray  # (n, f) int32, 0 = zero bin
    n_nonzero_bins: np.ndarray  # (f,) int64
    thresholds: list  # per feature: float64 array, thresholds[s] splits after bin s+1
    n_bins: int  # histogram width incl. zero bin


def _bin_matrix(X, max_bins):
    """Per-feature quantile bins over nonzero values; zero gets bin 0.

    The stored threshold for a split after bin b is the midpoint between
    that bin's largest value and the next bin's smallest, so value-space
    routing at prediction time reproduces bin-space routing exactly.
    """
    n, f = X.shape
    binned = np.zeros((n, f), dtype=np.int32)
    n_nonzero_bins = np.zeros(f, dtype=np.int64)
    thresholds = []
    for j in range(f):
        col = X[:, j]
        nz = np.sort(col[col != 0.0])
        if nz.size == 0:
            thresholds.append(np.zeros(0))
            continue
        uniq = np.unique(nz)
        if uniq.size <= max_bins:
            uppers = uniq
            lowers = uniq
        else:
            # equal-count cuts over the sorted nonzero values, deduplicated
            cut = (np.arange(1, max_bins + 1) * nz.size) // max_bins - 1
            uppers = np.unique(nz[cut])
            lowers = np.empty_like(uppers)
            lowers[0] = uniq[0]
            for b in range(1, uppers.size):
                lowers[b] = uniq[np.searchsorted(uniq, uppers[b - 1], side="right")]
        m = uppers.size
        n_nonzero_bins[j] = m
        mask = col != 0.0
        binned[mask, j] = 1 + np.searchsorted(uppers, col[mask], side="left")
        # thr[s] for s nonzero bins going left; s=0 puts only zeros left
        thr = np.empty(m)
        thr[0] = lowers[0] / 2.0
        for s in range(1, m):
            thr[s] = (uppers[s - 1] + lowers[s]) / 2.0
        thresholds.append(thr)
    n_bins = int(n_nonzero_bins.max()) + 1 if f else 1
    return _BinMaps(binned, n_nonzero_bins, thresholds, n_bins)


# -------------------------------------------------------------- tree grower

class _Leaf:
    __slots__ = ("node_id", "rows", "gain", "feature", "s", "zero_left")

    def __init__(self, node_id, rows):
        self.node_id = node_id
        self.rows = rows
        self.gain = -np.inf


def _best_split(leaf, maps, grad, hess, hp):
    hg, hh, hc = kernels.leaf_histograms(
        maps.binned, leaf.rows, grad, hess, maps.n_bins
    )
    gains, ss, zls = kernels.scan_splits(
        hg, hh, hc, maps.n_nonzero_bins, hp.min_samples_per_leaf, hp.l2_reg
    )
    j = int(np.argmax(gains))  # first max: lowest feature index wins ties
    leaf.gain = float(gains[j])
    leaf.feature = j
    leaf.s = int(ss[j])
    leaf.zero_left = bool(zls[j])


def _grow_tree(maps, grad, hess, hp, out_scores):
    """Grow one leaf-wise tree and add its shrunk outputs to out_scores."""
    n = maps.binned.shape[0]
    all_rows = np.arange(n, dtype=np.int64)
    feature, threshold, default_left = [-1], [0.0], [1]
    left, right, value, gain, is_leaf = [-1], [-1], [0.0], [0.0], [1]

    root = _Leaf(0, all_rows)
    _best_split(root, maps, grad, hess, hp)
    open_leaves = [root]
    n_leaves = 1
    split_gains = {}  # feature -> accumulated gain, this tree

    def acceptable(lf):
        return lf.gain > 0.0 and lf.gain >= hp.min_gain_to_split

    while n_leaves < hp.max_leaves:
        best = None
        for lf in open_leaves:  # insertion order; first wins gain ties
            if acceptable(lf) and (best is None or lf.gain > best.gain):
                best = lf
        if best is None:
            break
        open_leaves.remove(best)
        j = best.feature
        bcol = maps.binned[best.rows, j]
        go_left = np.where(bcol == 0, best.zero_left, bcol <= best.s)
        left_rows = best.rows[go_left]
        right_rows = best.rows[~go_left]

        nid = best.node_id
        feature[nid] = j
        threshold[nid] = float(maps.thresholds[j][best.s])
        default_left[nid] = 1 if best.zero_left else 0
        gain[nid] = best.gain
        is_leaf[nid] = 0
        split_gains[j] = split_gains.get(j, 0.0) + best.gain

        for child_rows, slot in ((left_rows, "left"), (right_rows, "right")):
            cid = len(feature)
            feature.append(-1)
            threshold.append(0.0)
            default_left.append(1)
            left.append(-1)
            right.append(-1)
            value.append(0.0)
            gain.append(0.0)
            is_leaf.append(1)
            if slot == "left":
                left[nid] = cid
            else:
                right[nid] = cid
            child = _Leaf(cid, child_rows)
            _best_split(child, maps, grad, hess, hp)
            open_leaves.append(child)
        n_leaves += 1

    # finalize leaf values and update running scores
    for lf in open_leaves:
        g = float(np.sum(grad[lf.rows]))
        h = float(np.sum(hess[lf.rows]))
        v = -hp.learning_rate * g / (h + hp.l2_reg)
        value[lf.node_id] = v
        out_scores[lf.rows] += v

    tree = Tree(
        feature=np.array(feature, dtype=np.int64),
        threshold=np.array(threshold),
        default_left=np.array(default_left, dtype=np.int8),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        value=np.array(value),
        gain=np.array(gain),
        is_leaf=np.array(is_leaf, dtype=np.int8),
    )
    return tree, split_gains


# ---------------------------------------------------------------- training

def _as_dense(X):
    if isinstance(X, SparseMatrix):
        return X.to_dense()
    return np.asarray(X, dtype=np.float64)


def _sigmoid(s):
    return 1.0 / (1.0 + np.exp(-s))


def _softmax(scores):
    z = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def train(X, y, class_names, hyperparams=None):
    """Fit the boosted ensemble; see module docstring for the algorithm."""
    hp = hyperparams or Hyperparams()
    Xd = _as_dense(X)
    y = np.asarray(y, dtype=np.int64)
    n, f = Xd.shape
    if n != len(y):
        raise TrainError(f"X has {n} rows but y has {len(y)} labels")
    K = len(class_names)
    if np.any((y < 0) | (y >= K)):
        raise TrainError("label index outside class_names range")
    if len(np.unique(y)) < 2:
        raise TrainError("training requires at least 2 distinct classes")
    if np.any(Xd < 0):
        raise TrainError("feature values must be non-negative")

    maps = _bin_matrix(Xd, hp.histogram_bins)
    binary = K == 2
    objective = "binary-logistic" if binary else "multiclass-softmax"

    counts = np.bincount(y, minlength=K).astype(np.float64)
    if binary:
        p1 = counts[1] / n
        base = np.log(p1 / (1.0 - p1))
        base_score = np.array([0.0, base])
        scores = np.full(n, base)
    else:
        # absent-but-declared classes get a floored prior
        base_score = np.log(np.maximum(counts, 0.5) / n)
        scores = np.tile(base_score, (n, 1))

    gain_ledger = np.zeros(f)
    trees = []
    losses = [_log_loss(scores, y, binary)]

    for _ in range(hp.num_rounds):
        round_trees = []
        if binary:
            p = _sigmoid(scores)
            grad = p - (y == 1).astype(np.float64)
            hess = p * (1.0 - p)
            tree, gains = _grow_tree(maps, grad, hess, hp, scores)
            round_trees.append(tree)
            for j, g in gains.items():
                gain_ledger[j] += g
        else:
            p = _softmax(scores)
            for k in range(K):
                grad = p[:, k] - (y == k).astype(np.float64)
                hess = p[:, k] * (1.0 - p[:, k])
                tree, gains = _grow_tree(maps, grad, hess, hp, scores[:, k])
                round_trees.append(tree)
                for j, g in gains.items():
                    gain_ledger[j] += g
        trees.append(round_trees)
        losses.append(_log_loss(scores, y, binary))

    if binary:
        train_pred = (scores > 0.0).astype(np.int64)  # tie (p=0.5) -> class 0
    else:
        train_pred = np.argmax(scores, axis=1)

    return GbdtModel(
        objective=objective,
        class_names=list(class_names),
        trees=trees,
        learning_rate=hp.learning_rate,
        base_score=base_score,
        feature_dim=f,
        hyperparams=hp,
        gain_ledger=gain_ledger,
        train_losses=losses,
        train_class_indices=train_pred,
    )


def _log_loss(scores, y, binary):
    if binary:
        yf = (y == 1).astype(np.float64)
        return float(np.mean(np.logaddexp(0.0, scores) - yf * scores))
    z = scores - scores.max(axis=1, keepdims=True)
    lse = np.log(np.sum(np.exp(z), axis=1)) + scores.max(axis=1)
    return float(np.mean(lse - scores[np.arange(len(y)), y]))


# --------------------------------------------------------------- prediction

def _raw_scores(model, Xd):
    n = Xd.shape[0]
    if model.objective == "binary-logistic":
        s = np.full(n, model.base_score[1])
        for round_trees in model.trees:
            s += round_trees[0].predict(Xd)
        return s
    scores = np.tile(model.base_score, (n, 1))
    for round_trees in model.trees:
        for k, tree in enumerate(round_trees):
            scores[:, k] += tree.predict(Xd)
    return scores


def _to_dense_rows(x, dim):
    if isinstance(x, SparseVector):
        return x.to_dense()[None, :]
    if isinstance(x, SparseMatrix):
        return x.to_dense()
    arr = np.asarray(x, dtype=np.float64)
    return arr[None, :] if arr.ndim == 1 else arr


def predict_proba(model, X):
    """Per-class probability matrix; rows sum to 1."""
    Xd = _to_dense_rows(X, model.feature_dim)
    if Xd.shape[1] != model.feature_dim:
        raise ValueError(
            f"input has {Xd.shape[1]} features, model expects {model.feature_dim}"
        )
    if model.objective == "binary-logistic":
        p1 = _sigmoid(_raw_scores(model, Xd))
        return np.column_stack([1.0 - p1, p1])
    return _softmax(_raw_scores(model, Xd))


def predict_scores(model, x):
    """Per-class probabilities for a single vector."""
    return predict_proba(model, x)[0]


def predict_class(model, x):
    """Class name at the probability argmax; ties go to the lowest index."""
    return model.class_names[int(np.argmax(predict_scores(model, x)))]


def predict_class_indices(model, X):
    return np.argmax(predict_proba(model, X), axis=1)


def gain_importance(model, space, top_k):
    """Top-k (n-gram, total gain) pairs, gain descending; zero-gain
    features are omitted."""
    if space.dim != model.feature_dim:
        raise ValueError(
            f"feature space dim {space.dim} != model feature_dim {model.feature_dim}"
        )
    names = space.feature_names()
    entries = [
        (names[j], float(g)) for j, g in enumerate(model.gain_ledger) if g > 0.0
    ]
    entries.sort(key=lambda t: (-t[1], space.vocabulary[t[0]]))
    return entries[: max(top_k, 0)]

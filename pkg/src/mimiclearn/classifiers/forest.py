"""Random forest of CART trees: Gini impurity, bootstrap per tree.

Trees are stored as flat, index-linked node arrays (children always come
after their parent), which keeps them cheap to walk vectorized and trivially
serializable. Each split considers ceil(sqrt(n_features)) candidate features
drawn from the tree's own generator; candidate thresholds are the midpoints
between consecutive distinct sorted values. Equal-impurity splits resolve to
the lower feature index, then the lower threshold, so training is fully
deterministic. Per-tree seeds derive from the spec seed and tree index,
making the forest identical under any thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..rng import STAGE_TREE, derive_seed, generator


@dataclass(frozen=True)
class TreeNodes:
    """One decision tree as parallel node arrays.

    ``feature[i] == -1`` marks a leaf (threshold is NaN, children are -1).
    ``counts[i]`` holds the class counts of the bootstrap samples that
    reached node i; a leaf votes for its argmax class (lower index on ties).
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    counts: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]


@dataclass(frozen=True)
class ForestModel:
    trees: tuple[TreeNodes, ...]
    n_features: int
    n_classes: int


def _gini_best_split(X, y, idx, feats, n_classes):
    """Best (gini, feature, threshold) over candidate features, or None."""
    m = idx.size
    best_gini = math.inf
    best = None
    for f in feats:
        values = X[idx, f]
        order = np.argsort(values, kind="stable")
        vs = values[order]
        ys = y[idx][order]
        cut = np.nonzero(vs[1:] != vs[:-1])[0]
        if cut.size == 0:
            continue
        onehot = np.zeros((m, n_classes), dtype=np.float64)
        onehot[np.arange(m), ys] = 1.0
        prefix = np.cumsum(onehot, axis=0)
        left_counts = prefix[cut]
        n_left = (cut + 1).astype(np.float64)
        n_right = m - n_left
        right_counts = prefix[-1] - left_counts
        gini_left = 1.0 - ((left_counts / n_left[:, None]) ** 2).sum(axis=1)
        gini_right = 1.0 - ((right_counts / n_right[:, None]) ** 2).sum(axis=1)
        gini = (n_left * gini_left + n_right * gini_right) / m
        j = int(np.argmin(gini))  # first minimum -> lowest threshold
        if gini[j] < best_gini:
            best_gini = float(gini[j])
            threshold = (vs[cut[j]] + vs[cut[j] + 1]) / 2.0
            best = (best_gini, int(f), float(threshold))
    return best


def _grow_tree(X, y, n_classes, max_depth, min_split, n_candidates, rng):
    n_features = X.shape[1]
    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    counts: list[np.ndarray] = []

    def recurse(idx: np.ndarray, depth: int) -> int:
        nid = len(feature)
        node_counts = np.bincount(y[idx], minlength=n_classes)
        feature.append(-1)
        threshold.append(0.0)  # never read at a leaf; keeps the JSON export finite
        left.append(-1)
        right.append(-1)
        counts.append(node_counts)
        if (
            depth >= max_depth
            or idx.size < min_split
            or int((node_counts > 0).sum()) <= 1
        ):
            return nid
        feats = np.sort(rng.choice(n_features, size=n_candidates, replace=False))
        best = _gini_best_split(X, y, idx, feats, n_classes)
        if best is None:
            return nid
        _, f, thr = best
        mask = X[idx, f] <= thr
        feature[nid] = f
        threshold[nid] = thr
        left[nid] = recurse(idx[mask], depth + 1)
        right[nid] = recurse(idx[~mask], depth + 1)
        return nid

    recurse(np.arange(X.shape[0]), 0)
    return TreeNodes(
        feature=np.array(feature, dtype=np.int64),
        threshold=np.array(threshold, dtype=np.float64),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        counts=np.array(counts, dtype=np.int64),
    )


def fit_forest(X, y, n_classes, n_trees, max_depth, min_split, seed, jobs=1) -> ForestModel:
    n = X.shape[0]
    n_candidates = min(X.shape[1], math.ceil(math.sqrt(X.shape[1])))

    def build(tree_index: int) -> TreeNodes:
        rng = generator(derive_seed(seed, STAGE_TREE, tree_index))
        sample = rng.integers(0, n, size=n)
        return _grow_tree(
            X[sample], y[sample], n_classes, max_depth, min_split, n_candidates, rng
        )

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            trees = tuple(pool.map(build, range(n_trees)))
    else:
        trees = tuple(build(i) for i in range(n_trees))
    return ForestModel(trees=trees, n_features=X.shape[1], n_classes=n_classes)


def tree_leaf_ids(tree: TreeNodes, X: np.ndarray) -> np.ndarray:
    """Vectorized root-to-leaf walk; returns the leaf node id per row."""
    node = np.zeros(X.shape[0], dtype=np.int64)
    while True:
        active = np.nonzero(tree.feature[node] >= 0)[0]
        if active.size == 0:
            return node
        cur = node[active]
        go_left = X[active, tree.feature[cur]] <= tree.threshold[cur]
        node[active] = np.where(go_left, tree.left[cur], tree.right[cur])


def tree_predict(tree: TreeNodes, X: np.ndarray) -> np.ndarray:
    leaves = tree_leaf_ids(tree, X)
    return np.argmax(tree.counts[leaves], axis=1)


def forest_votes(model: ForestModel, X: np.ndarray) -> np.ndarray:
    """Per-row vote counts, shape (n_rows, n_classes)."""
    votes = np.zeros((X.shape[0], model.n_classes), dtype=np.int64)
    rows = np.arange(X.shape[0])
    for tree in model.trees:
        votes[rows, tree_predict(tree, X)] += 1
    return votes

"""Regression trees as flat node arrays, grown and evaluated by numba kernels.

Node 0 is the root. A node with `left == -1` is a leaf. Rows go left when
`x[feature] <= threshold`.
"""

from dataclasses import dataclass
from typing import Any

import numpy as np
from numba import njit
from typeguard import typechecked

LEAF = -1


@dataclass(frozen=True)
class TreeArrays:
    """One fitted regression tree."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @property
    def n_nodes(self) -> int:
        """Node count."""
        return len(self.feature)

    @property
    def is_leaf(self) -> np.ndarray:
        """Boolean leaf indicator per node."""
        return self.left == LEAF

    def predict(self, X: np.ndarray) -> np.ndarray:
        """Leaf value reached by each row."""
        return _predict_tree(
            self.feature,
            self.threshold,
            self.left,
            self.right,
            self.value,
            np.ascontiguousarray(X, dtype=np.float64),
        )

    def used_features(self) -> set[int]:
        """Indices of the features some split tests."""
        return set(self.feature[~self.is_leaf].tolist())

    def to_dict(self) -> dict[str, Any]:
        """JSON-ready representation."""
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "TreeArrays":
        """Rebuild from `to_dict` output."""
        return cls(
            feature=np.asarray(data["feature"], dtype=np.int64),
            threshold=np.asarray(data["threshold"], dtype=np.float64),
            left=np.asarray(data["left"], dtype=np.int64),
            right=np.asarray(data["right"], dtype=np.int64),
            value=np.asarray(data["value"], dtype=np.float64),
        )


@njit(cache=True, nogil=True)
def _predict_tree(feature, threshold, left, right, value, X):
    out = np.empty(X.shape[0])
    for i in range(X.shape[0]):
        node = 0
        while left[node] != -1:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = value[node]
    return out


@njit(cache=True, nogil=True)
def _grow_tree(
    X,
    y,
    samples,
    max_depth,
    min_samples_split,
    min_samples_leaf,
    n_candidates,
    random_splits,
    uniforms,
):
    """Depth-first CART growth on squared error.

    `uniforms[node, :d]` drives the per-node feature subsample, `uniforms[node, d:]` the
    random thresholds. It is only read when subsampling or random splits are on.
    """
    n_features = X.shape[1]
    capacity = 2 * samples.shape[0] + 1
    feature = np.full(capacity, -1, np.int64)
    threshold = np.zeros(capacity)
    left = np.full(capacity, -1, np.int64)
    right = np.full(capacity, -1, np.int64)
    value = np.zeros(capacity)

    stack_node = np.empty(capacity, np.int64)
    stack_start = np.empty(capacity, np.int64)
    stack_end = np.empty(capacity, np.int64)
    stack_depth = np.empty(capacity, np.int64)
    stack_node[0] = 0
    stack_start[0] = 0
    stack_end[0] = samples.shape[0]
    stack_depth[0] = 0
    top = 1
    n_nodes = 1

    order = np.arange(n_features)
    xs = np.empty(samples.shape[0])
    ys = np.empty(samples.shape[0])
    scratch = np.empty(samples.shape[0], np.int64)

    while top > 0:
        top -= 1
        node = stack_node[top]
        start = stack_start[top]
        end = stack_end[top]
        depth = stack_depth[top]
        n = end - start

        total = 0.0
        for k in range(start, end):
            total += y[samples[k]]
        value[node] = total / n

        if n < min_samples_split or n < 2 * min_samples_leaf:
            continue
        if max_depth >= 0 and depth >= max_depth:
            continue

        for i in range(n_features):
            order[i] = i
        if n_candidates < n_features:
            for i in range(n_candidates):
                j = i + int(uniforms[node, i] * (n_features - i))
                if j > n_features - 1:
                    j = n_features - 1
                swap = order[i]
                order[i] = order[j]
                order[j] = swap
        candidates = np.sort(order[:n_candidates])

        parent = total * total / n
        best_gain = -np.inf
        best_feature = -1
        best_threshold = 0.0
        for f in candidates:
            for k in range(n):
                xs[k] = X[samples[start + k], f]
                ys[k] = y[samples[start + k]]
            if random_splits:
                lo = xs[:n].min()
                hi = xs[:n].max()
                if not lo < hi:
                    continue
                thr = lo + uniforms[node, n_features + f] * (hi - lo)
                if not thr < hi:
                    thr = lo
                sum_left = 0.0
                n_left = 0
                for k in range(n):
                    if xs[k] <= thr:
                        sum_left += ys[k]
                        n_left += 1
                n_right = n - n_left
                if n_left < min_samples_leaf or n_right < min_samples_leaf:
                    continue
                sum_right = total - sum_left
                gain = sum_left * sum_left / n_left + sum_right * sum_right / n_right
                if gain > best_gain:
                    best_gain = gain
                    best_feature = f
                    best_threshold = thr
            else:
                idx = np.argsort(xs[:n], kind="mergesort")
                sum_left = 0.0
                for k in range(n - 1):
                    sum_left += ys[idx[k]]
                    lo = xs[idx[k]]
                    hi = xs[idx[k + 1]]
                    if not lo < hi:
                        continue
                    n_left = k + 1
                    n_right = n - n_left
                    if n_left < min_samples_leaf or n_right < min_samples_leaf:
                        continue
                    sum_right = total - sum_left
                    gain = sum_left * sum_left / n_left + sum_right * sum_right / n_right
                    if gain > best_gain:
                        best_gain = gain
                        best_feature = f
                        thr = lo + (hi - lo) / 2.0
                        best_threshold = thr if thr < hi else lo

        if best_feature < 0 or best_gain - parent <= 1e-12 * max(1.0, abs(parent)):
            continue

        n_left = 0
        n_right = 0
        for k in range(start, end):
            s = samples[k]
            if X[s, best_feature] <= best_threshold:
                samples[start + n_left] = s
                n_left += 1
            else:
                scratch[n_right] = s
                n_right += 1
        for k in range(n_right):
            samples[start + n_left + k] = scratch[k]

        feature[node] = best_feature
        threshold[node] = best_threshold
        left[node] = n_nodes
        right[node] = n_nodes + 1

        stack_node[top] = n_nodes + 1
        stack_start[top] = start + n_left
        stack_end[top] = end
        stack_depth[top] = depth + 1
        top += 1
        stack_node[top] = n_nodes
        stack_start[top] = start
        stack_end[top] = start + n_left
        stack_depth[top] = depth + 1
        top += 1
        n_nodes += 2

    return (
        feature[:n_nodes],
        threshold[:n_nodes],
        left[:n_nodes],
        right[:n_nodes],
        value[:n_nodes],
    )


@typechecked
def grow_tree(
    X: np.ndarray,
    y: np.ndarray,
    max_depth: int | None = None,
    min_samples_split: int = 2,
    min_samples_leaf: int = 1,
    max_features: float = 1.0,
    random_splits: bool = False,
    rng: np.random.Generator | None = None,
    samples: np.ndarray | None = None,
) -> TreeArrays:
    """Grow a regression tree minimizing squared error.

    Best splits scan every midpoint between consecutive distinct values; equal gains go
    to the lowest feature index, then the lowest threshold. Random splits draw one
    threshold per candidate feature uniformly between the node's minimum and maximum.

    Args:
        X: n x d training features.
        y: n training targets.
        max_depth: Depth cap. None for unlimited.
        min_samples_split: Smallest node that may be split.
        min_samples_leaf: Smallest allowed child.
        max_features: Share of features considered at each node, at least one.
        random_splits: Draw thresholds at random instead of searching them.
        rng: Source of the feature subsample and the random thresholds. Required when
            either is used.
        samples: Training row indices, repeated for bootstrap draws. Defaults to all
            rows once.

    Returns:
        The tree.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    n_features = X.shape[1]
    samples = (
        np.arange(X.shape[0], dtype=np.int64)
        if samples is None
        else np.array(samples, dtype=np.int64, copy=True)
    )
    if len(samples) == 0:
        raise ValueError("A tree needs at least one training row.")
    n_candidates = max(1, int(round(max_features * n_features)))
    if n_candidates < n_features or random_splits:
        if rng is None:
            raise ValueError("Feature subsampling and random splits need an rng.")
        uniforms = rng.random((2 * len(samples) + 1, 2 * n_features))
    else:
        uniforms = np.empty((0, 2 * n_features))

    feature, threshold, left, right, value = _grow_tree(
        X,
        y,
        samples,
        -1 if max_depth is None else max_depth,
        min_samples_split,
        min_samples_leaf,
        n_candidates,
        random_splits,
        uniforms,
    )
    return TreeArrays(
        feature=feature.copy(),
        threshold=threshold.copy(),
        left=left.copy(),
        right=right.copy(),
        value=value.copy(),
    )

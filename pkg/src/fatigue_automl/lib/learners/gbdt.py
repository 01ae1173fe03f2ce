"""Histogram-based gradient-boosted regression trees on squared error.

Features are bucketed into at most 255 quantile bins fitted on the training rows. Trees
grow best-first on gradient histograms: the open leaf with the largest gain is split
next, until no split gains, the depth cap is reached everywhere or the leaf cap is hit.
With no leaf cap this is plain depth-wise growth.
"""

import logging
from dataclasses import dataclass

import numpy as np
from numba import njit
from typeguard import typechecked

from fatigue_automl.lib.constants import MAX_BINS
from fatigue_automl.lib.learners.tree import TreeArrays
from fatigue_automl.lib.utils import derive_rng

logger = logging.getLogger(__name__)

_MIN_GAIN = 1e-12


@dataclass(frozen=True)
class LogEntry:
    """Training and validation RMSE after one iteration (1-based)."""

    iteration: int
    train_metric: float
    valid_metric: float


@dataclass(frozen=True)
class BoostedTrees:
    """Staged trees: prediction = init + learning_rate * sum of stage outputs."""

    init: float
    learning_rate: float
    trees: tuple[TreeArrays, ...]

    def predict(self, X: np.ndarray) -> np.ndarray:
        """Staged prediction over all kept stages."""
        X = np.ascontiguousarray(X, dtype=np.float64)
        out = np.full(X.shape[0], self.init)
        for tree in self.trees:
            out += self.learning_rate * tree.predict(X)
        return out


@typechecked
def fit_bin_edges(X: np.ndarray, max_bins: int = MAX_BINS) -> list[np.ndarray]:
    """Upper bin edges per feature.

    Features with at most `max_bins` distinct values get one bin per value. Others get
    quantile edges. The last edge is always the training maximum.
    """
    edges = []
    for column in np.asarray(X, dtype=np.float64).T:
        distinct = np.unique(column)
        if len(distinct) <= max_bins:
            edges.append(distinct)
        else:
            quantiles = np.quantile(column, np.linspace(0.0, 1.0, max_bins + 1)[1:])
            edges.append(np.unique(quantiles))
    return edges


@typechecked
def bin_codes(X: np.ndarray, edges: list[np.ndarray]) -> np.ndarray:
    """Bin index per cell: code k means edges[k - 1] < x <= edges[k]."""
    X = np.asarray(X, dtype=np.float64)
    codes = np.empty(X.shape, dtype=np.int64)
    for j, feature_edges in enumerate(edges):
        codes[:, j] = np.minimum(
            np.searchsorted(feature_edges, X[:, j], side="left"), len(feature_edges) - 1
        )
    return codes


@njit(cache=True, nogil=True)
def _best_split(
    codes, grad, hess, samples, start, end, features, n_bins, g_sum, h_sum, params
):
    min_child_weight, min_data, reg_lambda, max_bins = params
    best_gain = _MIN_GAIN
    best_feature = -1
    best_bin = -1
    hist_g = np.zeros(int(max_bins))
    hist_h = np.zeros(int(max_bins))
    hist_n = np.zeros(int(max_bins), np.int64)
    parent = g_sum * g_sum / (h_sum + reg_lambda)
    n = end - start
    for f in features:
        bins = n_bins[f]
        hist_g[:bins] = 0.0
        hist_h[:bins] = 0.0
        hist_n[:bins] = 0
        for k in range(start, end):
            s = samples[k]
            b = codes[s, f]
            hist_g[b] += grad[s]
            hist_h[b] += hess[s]
            hist_n[b] += 1
        gl = 0.0
        hl = 0.0
        nl = 0
        for b in range(bins - 1):
            gl += hist_g[b]
            hl += hist_h[b]
            nl += hist_n[b]
            nr = n - nl
            if nl < min_data or nr < min_data:
                continue
            hr = h_sum - hl
            if hl < min_child_weight or hr < min_child_weight:
                continue
            gr = g_sum - gl
            gain = gl * gl / (hl + reg_lambda) + gr * gr / (hr + reg_lambda) - parent
            if gain > best_gain:
                best_gain = gain
                best_feature = f
                best_bin = b
    return best_feature, best_bin, best_gain


@njit(cache=True, nogil=True)
def _grow_hist_tree(
    codes, grad, hess, samples, features, n_bins, max_depth, max_leaves, params
):
    """Best-first growth. Returns node arrays with split bins instead of thresholds."""
    reg_lambda = params[2]
    capacity = 2 * samples.shape[0] + 1
    feature = np.full(capacity, -1, np.int64)
    split_bin = np.full(capacity, -1, np.int64)
    left = np.full(capacity, -1, np.int64)
    right = np.full(capacity, -1, np.int64)
    value = np.zeros(capacity)
    start = np.zeros(capacity, np.int64)
    end = np.zeros(capacity, np.int64)
    depth = np.zeros(capacity, np.int64)
    g_sum = np.zeros(capacity)
    h_sum = np.zeros(capacity)
    cand_feature = np.full(capacity, -1, np.int64)
    cand_bin = np.full(capacity, -1, np.int64)
    cand_gain = np.zeros(capacity)
    scratch = np.empty(samples.shape[0], np.int64)

    end[0] = samples.shape[0]
    for k in range(samples.shape[0]):
        g_sum[0] += grad[samples[k]]
        h_sum[0] += hess[samples[k]]
    n_nodes = 1
    if max_depth != 0:
        split = _best_split(
            codes, grad, hess, samples, 0, end[0], features, n_bins, g_sum[0], h_sum[0],
            params,
        )
        cand_feature[0] = split[0]
        cand_bin[0] = split[1]
        cand_gain[0] = split[2]
    n_leaves = 1

    while max_leaves < 0 or n_leaves < max_leaves:
        best = -1
        best_gain = 0.0
        for node in range(n_nodes):
            if cand_feature[node] >= 0 and cand_gain[node] > best_gain:
                best = node
                best_gain = cand_gain[node]
        if best < 0:
            break

        f = cand_feature[best]
        b = cand_bin[best]
        n_left = 0
        n_right = 0
        for k in range(start[best], end[best]):
            s = samples[k]
            if codes[s, f] <= b:
                samples[start[best] + n_left] = s
                n_left += 1
            else:
                scratch[n_right] = s
                n_right += 1
        for k in range(n_right):
            samples[start[best] + n_left + k] = scratch[k]

        feature[best] = f
        split_bin[best] = b
        left[best] = n_nodes
        right[best] = n_nodes + 1
        cand_feature[best] = -1

        start[n_nodes] = start[best]
        end[n_nodes] = start[best] + n_left
        start[n_nodes + 1] = start[best] + n_left
        end[n_nodes + 1] = end[best]
        for child in range(n_nodes, n_nodes + 2):
            depth[child] = depth[best] + 1
            for k in range(start[child], end[child]):
                g_sum[child] += grad[samples[k]]
                h_sum[child] += hess[samples[k]]
            if max_depth < 0 or depth[child] < max_depth:
                split = _best_split(
                    codes, grad, hess, samples, start[child], end[child], features,
                    n_bins, g_sum[child], h_sum[child], params,
                )
                cand_feature[child] = split[0]
                cand_bin[child] = split[1]
                cand_gain[child] = split[2]
        n_nodes += 2
        n_leaves += 1

    for node in range(n_nodes):
        value[node] = -g_sum[node] / (h_sum[node] + reg_lambda)
    return (
        feature[:n_nodes],
        split_bin[:n_nodes],
        left[:n_nodes],
        right[:n_nodes],
        value[:n_nodes],
    )


@typechecked
def grow_hist_tree(
    codes: np.ndarray,
    edges: list[np.ndarray],
    grad: np.ndarray,
    hess: np.ndarray,
    samples: np.ndarray,
    features: np.ndarray,
    max_depth: int | None,
    max_leaves: int | None,
    min_child_weight: float,
    min_data_in_leaf: int,
    reg_lambda: float,
) -> TreeArrays:
    """Grow one tree on gradient histograms.

    Leaf values are -G / (H + reg_lambda) over the leaf's rows. Split thresholds are the
    raw upper edges of the split bins, so `x <= threshold` reproduces the bin test.
    Equal gains go to the lowest feature index, then the lowest bin.
    """
    n_bins = np.array([len(feature_edges) for feature_edges in edges], dtype=np.int64)
    params = (
        float(min_child_weight),
        float(min_data_in_leaf),
        float(reg_lambda),
        float(max(n_bins.max(initial=1), 1)),
    )
    feature, split_bin, left, right, value = _grow_hist_tree(
        np.ascontiguousarray(codes, dtype=np.int64),
        np.ascontiguousarray(grad, dtype=np.float64),
        np.ascontiguousarray(hess, dtype=np.float64),
        np.array(samples, dtype=np.int64, copy=True),
        np.sort(np.asarray(features, dtype=np.int64)),
        n_bins,
        -1 if max_depth is None else max_depth,
        -1 if max_leaves is None else max_leaves,
        params,
    )
    threshold = np.zeros(len(feature))
    for node in np.flatnonzero(left >= 0):
        threshold[node] = edges[feature[node]][split_bin[node]]
    return TreeArrays(
        feature=feature.copy(),
        threshold=threshold,
        left=left.copy(),
        right=right.copy(),
        value=value.copy(),
    )


@typechecked
def fit_gbdt(
    X: np.ndarray,
    y: np.ndarray,
    n_estimators: int,
    learning_rate: float,
    max_depth: int | None,
    num_leaves: int | None,
    min_child_weight: float,
    min_data_in_leaf: int,
    subsample: float,
    colsample: float,
    reg_lambda: float,
    early_stopping_rounds: int | None,
    seed: int,
    validation: tuple[np.ndarray, np.ndarray] | None = None,
) -> tuple[BoostedTrees, tuple[LogEntry, ...], int]:
    """Fit staged trees on squared-error residuals.

    Every row of X trains every stage. Early stopping and truncation happen only with
    explicit validation rows; without them every stage is kept.

    Args:
        X: n x d training features.
        y: n training targets.
        n_estimators: Stage cap.
        learning_rate: Shrinkage of every stage.
        max_depth: Depth cap per tree. None for unlimited.
        num_leaves: Leaf cap per tree. None for unlimited.
        min_child_weight: Smallest hessian sum of a child.
        min_data_in_leaf: Smallest row count of a child.
        subsample: Share of rows drawn (without replacement) per stage.
        colsample: Share of features drawn per tree.
        reg_lambda: L2 penalty on leaf values.
        early_stopping_rounds: Stop after this many stages without a validation
            improvement. None disables early stopping.
        seed: Root seed of the row and feature subsamples.
        validation: Optional explicit validation rows.

    Returns:
        The model (truncated to the best stage when validated), the per-stage log, and
        the best stage (1-based; ties go to the earliest stage).
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    X_valid, y_valid = (None, None) if validation is None else validation

    edges = fit_bin_edges(X)
    codes = bin_codes(X, edges)
    n_rows, n_features = X.shape
    init = float(y.mean())
    pred = np.full(n_rows, init)
    pred_valid = None if X_valid is None else np.full(len(y_valid), init)
    hess = np.ones(n_rows)
    n_sub_features = max(1, int(round(colsample * n_features)))

    trees: list[TreeArrays] = []
    log: list[LogEntry] = []
    best_iteration = 0
    best_valid = np.inf
    for stage in range(1, n_estimators + 1):
        rng = derive_rng(seed, "stage", stage)
        if subsample < 1.0:
            samples = np.flatnonzero(rng.random(n_rows) < subsample)
            if len(samples) == 0:
                samples = np.arange(n_rows)
        else:
            samples = np.arange(n_rows)
        if n_sub_features < n_features:
            features = np.sort(rng.choice(n_features, size=n_sub_features, replace=False))
        else:
            features = np.arange(n_features)

        tree = grow_hist_tree(
            codes=codes,
            edges=edges,
            grad=pred - y,
            hess=hess,
            samples=samples,
            features=features,
            max_depth=max_depth,
            max_leaves=num_leaves,
            min_child_weight=min_child_weight,
            min_data_in_leaf=min_data_in_leaf,
            reg_lambda=reg_lambda,
        )
        trees.append(tree)
        pred += learning_rate * tree.predict(X)
        train_rmse = float(np.sqrt(np.mean((pred - y) ** 2)))
        if pred_valid is None:
            log.append(LogEntry(stage, train_rmse, np.nan))
            best_iteration = stage
            continue

        pred_valid += learning_rate * tree.predict(X_valid)
        valid_rmse = float(np.sqrt(np.mean((pred_valid - y_valid) ** 2)))
        log.append(LogEntry(stage, train_rmse, valid_rmse))
        if valid_rmse < best_valid:
            best_valid = valid_rmse
            best_iteration = stage
        elif early_stopping_rounds is not None and stage - best_iteration >= (
            early_stopping_rounds
        ):
            logger.debug(f"Early stopping at stage {stage}. Best stage {best_iteration}.")
            break

    model = BoostedTrees(
        init=init, learning_rate=learning_rate, trees=tuple(trees[:best_iteration])
    )
    return model, tuple(log), best_iteration

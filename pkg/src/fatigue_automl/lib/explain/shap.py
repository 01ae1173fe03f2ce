"""Interventional SHAP values.

Attributions explain the model output against a background sample: the base value is
the mean prediction over the background, and each row's attributions sum to its
prediction minus the base value.

- linear models: closed form, coef * (x - background mean).
- tree models: exact interventional tree SHAP, walking every tree jointly for each
  (row, background row) pair.
- networks: antithetic permutation sampling, corrected to sum exactly.

`brute_force_shap` enumerates every feature subset and serves as the reference for the
exact paths.
"""

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from joblib import Parallel, delayed
from numba import njit
from typeguard import typechecked

from fatigue_automl.lib.automl.ensemble import EnsembleModel
from fatigue_automl.lib.constants import SHAP_BACKGROUND_SIZE, SHAP_PERMUTATIONS, Family
from fatigue_automl.lib.errors import WidthMismatch
from fatigue_automl.lib.learners.model import (
    ConstantParams,
    FittedModel,
    LinearParams,
    TreeEnsembleParams,
    predict,
)
from fatigue_automl.lib.learners.tree import TreeArrays
from fatigue_automl.lib.utils import derive_rng

logger = logging.getLogger(__name__)

# Rows per worker task.
_CHUNK = 16


@dataclass(frozen=True)
class ShapMatrix:
    """Attributions of n rows over d features.

    Args:
        base_value: Mean model output over the background.
        values: n x d attributions.
        feature_names: The d feature names.
        background_size: Background row count.
        method: "linear", "tree", "sampling", "constant" or "ensemble".
    """

    base_value: float
    values: np.ndarray
    feature_names: tuple[str, ...]
    background_size: int
    method: str

    @property
    def output(self) -> np.ndarray:
        """Base value plus the attribution sum of every row."""
        return self.base_value + self.values.sum(axis=1)


@typechecked
def sample_background(X_train: np.ndarray, size: int, seed: int) -> np.ndarray:
    """Up to `size` training rows drawn without replacement, in row order."""
    if len(X_train) <= size:
        return np.asarray(X_train, dtype=np.float64).copy()
    rows = np.sort(derive_rng(seed, "background").choice(len(X_train), size, replace=False))
    return np.asarray(X_train[rows], dtype=np.float64)


@typechecked
def shapley_coefficients(d: int) -> tuple[np.ndarray, np.ndarray]:
    """Leaf weights of the interventional tree algorithm.

    For a leaf reached with `a` features taken from the explained row and `b` from the
    background row: features of the first kind gain (a-1)! b! / (a+b)! of the leaf
    value, features of the second kind lose a! (b-1)! / (a+b)! of it.
    """
    gain = np.zeros((d + 1, d + 1))
    loss = np.zeros((d + 1, d + 1))
    for a in range(d + 1):
        for b in range(d + 1 - a):
            if a >= 1:
                gain[a, b] = math.exp(
                    math.lgamma(a) + math.lgamma(b + 1) - math.lgamma(a + b + 1)
                )
            if b >= 1:
                loss[a, b] = math.exp(
                    math.lgamma(a + 1) + math.lgamma(b) - math.lgamma(a + b + 1)
                )
    return gain, loss


@njit(cache=True, nogil=True)
def _tree_shap(feature, threshold, left, right, value, X, Z, gain, loss):
    n, d = X.shape
    n_background = Z.shape[0]
    phi = np.zeros((n, d))
    capacity = feature.shape[0] + 1
    stack_node = np.empty(capacity, dtype=np.int64)
    # 0: unset, 1: taken from the explained row, 2: taken from the background row.
    stack_state = np.zeros((capacity, d), dtype=np.int8)
    state = np.zeros(d, dtype=np.int8)
    for i in range(n):
        for j in range(n_background):
            stack_node[0] = 0
            stack_state[0, :] = 0
            top = 1
            while top > 0:
                top -= 1
                node = stack_node[top]
                state[:] = stack_state[top]
                if left[node] == -1:
                    a = 0
                    b = 0
                    for k in range(d):
                        if state[k] == 1:
                            a += 1
                        elif state[k] == 2:
                            b += 1
                    if a + b == 0:
                        continue
                    v = value[node]
                    for k in range(d):
                        if state[k] == 1:
                            phi[i, k] += v * gain[a, b]
                        elif state[k] == 2:
                            phi[i, k] -= v * loss[a, b]
                    continue
                f = feature[node]
                x_child = left[node] if X[i, f] <= threshold[node] else right[node]
                z_child = left[node] if Z[j, f] <= threshold[node] else right[node]
                if x_child == z_child or state[f] == 1:
                    stack_node[top] = x_child
                    stack_state[top, :] = state
                    top += 1
                elif state[f] == 2:
                    stack_node[top] = z_child
                    stack_state[top, :] = state
                    top += 1
                else:
                    stack_node[top] = x_child
                    stack_state[top, :] = state
                    stack_state[top, f] = 1
                    top += 1
                    stack_node[top] = z_child
                    stack_state[top, :] = state
                    stack_state[top, f] = 2
                    top += 1
    return phi / n_background


@typechecked
def tree_shap(tree: TreeArrays, X: np.ndarray, background: np.ndarray) -> np.ndarray:
    """Exact interventional SHAP values of one tree, averaged over the background."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    background = np.ascontiguousarray(background, dtype=np.float64)
    gain, loss = shapley_coefficients(X.shape[1])
    return _tree_shap(
        tree.feature,
        tree.threshold,
        tree.left,
        tree.right,
        tree.value,
        X,
        background,
        gain,
        loss,
    )


def _tree_ensemble_shap(
    params: TreeEnsembleParams, X: np.ndarray, background: np.ndarray, jobs: int
) -> np.ndarray:
    _, trees, weights = params.tree_ensemble()

    def chunk(rows: np.ndarray) -> np.ndarray:
        out = np.zeros((len(rows), X.shape[1]))
        for tree, weight in zip(trees, weights):
            out += weight * tree_shap(tree, X[rows], background)
        return out

    chunks = np.array_split(np.arange(len(X)), max(1, math.ceil(len(X) / _CHUNK)))
    parts = Parallel(n_jobs=jobs, prefer="threads")(
        delayed(chunk)(rows) for rows in chunks if len(rows)
    )
    return np.vstack(parts) if parts else np.zeros((0, X.shape[1]))


@typechecked
def sampling_shap(
    predict_fn: Callable[[np.ndarray], np.ndarray],
    X: np.ndarray,
    background: np.ndarray,
    n_permutations: int,
    seed: int,
    base_value: float | None = None,
) -> np.ndarray:
    """Permutation-sampling SHAP values with antithetic pairs.

    Each permutation is paired with its reverse and one background row drawn for the
    pair. Row i uses the stream (seed, "shap", i). The residual of the efficiency
    constraint is spread evenly over the features, so each row sums exactly to its
    prediction minus the base value.
    """
    X = np.asarray(X, dtype=np.float64)
    background = np.asarray(background, dtype=np.float64)
    n, d = X.shape
    if base_value is None:
        base_value = float(np.mean(predict_fn(background)))
    n_pairs = max(1, n_permutations // 2)
    phi = np.zeros((n, d))
    predictions = predict_fn(X)
    for i in range(n):
        rng = derive_rng(seed, "shap", i)
        orders = [rng.permutation(d) for _ in range(n_pairs)]
        starts = rng.integers(len(background), size=n_pairs)
        orders = [order for pair in orders for order in (pair, pair[::-1])]
        starts = np.repeat(starts, 2)
        # Rows of the walk: start at the background row, switch features to x in order.
        walks = np.empty((len(orders), d + 1, d))
        for p, (order, start) in enumerate(zip(orders, starts)):
            current = background[start].copy()
            walks[p, 0] = current
            for step, k in enumerate(order, start=1):
                current[k] = X[i, k]
                walks[p, step] = current
        outputs = predict_fn(walks.reshape(-1, d)).reshape(len(orders), d + 1)
        deltas = np.diff(outputs, axis=1)
        for p, order in enumerate(orders):
            phi[i, order] += deltas[p]
        phi[i] /= len(orders)
        phi[i] += (predictions[i] - base_value - phi[i].sum()) / d
    return phi


@typechecked
def brute_force_shap(
    predict_fn: Callable[[np.ndarray], np.ndarray], x: np.ndarray, background: np.ndarray
) -> np.ndarray:
    """Exact interventional Shapley values of one row by subset enumeration.

    The value of a coalition S is the mean prediction over background rows with the
    features of S set to x. Exponential in d; for checking only.
    """
    x = np.asarray(x, dtype=np.float64)
    background = np.asarray(background, dtype=np.float64)
    d = len(x)

    def coalition_value(members: tuple[int, ...]) -> float:
        rows = background.copy()
        rows[:, list(members)] = x[list(members)]
        return float(np.mean(predict_fn(rows)))

    values = {
        members: coalition_value(members)
        for size in range(d + 1)
        for members in combinations(range(d), size)
    }
    phi = np.zeros(d)
    for j in range(d):
        others = [k for k in range(d) if k != j]
        for size in range(d):
            weight = math.factorial(size) * math.factorial(d - size - 1) / math.factorial(d)
            for members in combinations(others, size):
                with_j = tuple(sorted((*members, j)))
                phi[j] += weight * (values[with_j] - values[members])
    return phi


@typechecked
def shap_values(
    m: FittedModel | EnsembleModel,
    X_explain: np.ndarray,
    background: np.ndarray,
    feature_names: tuple[str, ...] | list[str] = (),
    n_permutations: int = SHAP_PERMUTATIONS,
    seed: int = 0,
    jobs: int = 1,
) -> ShapMatrix:
    """SHAP values of a model, dispatched on its family.

    Ensembles combine the members' attributions with the ensemble weights.

    Args:
        m: A fitted model or an ensemble.
        X_explain: Rows to explain, in the model's feature space.
        background: Background rows, non-empty. Larger backgrounds are cut to a seeded
            sample of 512 rows.
        feature_names: Names of the features. Defaults to the model's.
        n_permutations: Permutations per row for networks.
        seed: Seed of the background cut and the network sampling streams.
        jobs: Worker threads for tree models.

    Raises:
        WidthMismatch: If a matrix width differs from the model's.
    """
    X_explain = np.asarray(X_explain, dtype=np.float64)
    background = np.asarray(background, dtype=np.float64)
    if len(background) == 0:
        raise ValueError("The SHAP background needs at least one row.")
    for matrix in (X_explain, background):
        if matrix.ndim != 2 or matrix.shape[1] != m.n_features:
            raise WidthMismatch(
                f"Model expects {m.n_features} features. Got shape {matrix.shape}."
            )
    if len(background) > SHAP_BACKGROUND_SIZE:
        logger.info(f"Cutting the SHAP background to {SHAP_BACKGROUND_SIZE} rows.")
        background = sample_background(background, SHAP_BACKGROUND_SIZE, seed)
    names = tuple(feature_names) or tuple(m.feature_names)

    if isinstance(m, EnsembleModel):
        parts = [
            shap_values(member, X_explain, background, names, n_permutations, seed, jobs)
            for member in m.members
        ]
        return ShapMatrix(
            base_value=float(sum(w * part.base_value for w, part in zip(m.weights, parts))),
            values=sum(w * part.values for w, part in zip(m.weights, parts)),
            feature_names=names,
            background_size=len(background),
            method="ensemble",
        )

    base_value = float(np.mean(predict(m, background)))
    params = m.params
    if isinstance(params, ConstantParams):
        values = np.zeros_like(X_explain)
        method = "constant"
    elif isinstance(params, LinearParams):
        values = params.coef * (X_explain - background.mean(axis=0))
        method = "linear"
    elif isinstance(params, TreeEnsembleParams):
        values = _tree_ensemble_shap(params, X_explain, background, jobs)
        method = "tree"
    else:
        if m.family != Family.NN:
            raise ValueError(f"No SHAP path for family {m.family}.")
        values = sampling_shap(
            lambda rows: predict(m, rows),
            X_explain,
            background,
            n_permutations=n_permutations,
            seed=seed,
            base_value=base_value,
        )
        method = "sampling"
    return ShapMatrix(
        base_value=base_value,
        values=np.asarray(values, dtype=np.float64),
        feature_names=names,
        background_size=len(background),
        method=method,
    )

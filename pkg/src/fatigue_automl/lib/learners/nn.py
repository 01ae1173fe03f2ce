"""Feedforward regression network: two ReLU layers with dropout, linear output.

Trained on mean squared error with mini-batch SGD, momentum and time-based learning-rate
decay lr / (1 + decay * step). The weights of the best validation epoch are restored.
"""

import logging
from dataclasses import dataclass

import numpy as np
from numba import njit
from typeguard import typechecked

from fatigue_automl.lib.constants import (
    INTERNAL_VALIDATION_FRACTION,
    MIN_ROWS_FOR_INTERNAL_VALIDATION,
)
from fatigue_automl.lib.errors import NonFiniteLoss
from fatigue_automl.lib.learners.gbdt import LogEntry
from fatigue_automl.lib.utils import derive_rng

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class NetworkWeights:
    """Layer weights: w1 (d x h1), w2 (h1 x h2), w3 (h2,) and their biases."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    w3: np.ndarray
    b3: float

    def predict(self, X: np.ndarray) -> np.ndarray:
        """Forward pass with dropout off."""
        hidden1 = np.maximum(np.asarray(X, dtype=np.float64) @ self.w1 + self.b1, 0.0)
        hidden2 = np.maximum(hidden1 @ self.w2 + self.b2, 0.0)
        return hidden2 @ self.w3 + self.b3

    def as_arrays(self) -> tuple[np.ndarray, ...]:
        """Copies of the parameters in (w1, b1, w2, b2, w3, b3) order, b3 as a 1-vector."""
        return (
            self.w1.copy(),
            self.b1.copy(),
            self.w2.copy(),
            self.b2.copy(),
            self.w3.copy(),
            np.array([self.b3]),
        )

    @classmethod
    def from_arrays(cls, arrays: tuple[np.ndarray, ...]) -> "NetworkWeights":
        """Inverse of `as_arrays`."""
        w1, b1, w2, b2, w3, b3 = arrays
        return cls(
            w1=w1.copy(),
            b1=b1.copy(),
            w2=w2.copy(),
            b2=b2.copy(),
            w3=w3.copy(),
            b3=float(b3[0]),
        )


@typechecked
def init_network(
    n_inputs: int, dense1: int, dense2: int, rng: np.random.Generator
) -> NetworkWeights:
    """He initialization scaled by fan-in, zero biases."""
    return NetworkWeights(
        w1=rng.normal(0.0, np.sqrt(2.0 / n_inputs), size=(n_inputs, dense1)),
        b1=np.zeros(dense1),
        w2=rng.normal(0.0, np.sqrt(2.0 / dense1), size=(dense1, dense2)),
        b2=np.zeros(dense2),
        w3=rng.normal(0.0, np.sqrt(2.0 / dense2), size=dense2),
        b3=0.0,
    )


@njit(cache=True, nogil=True)
def _gate(values, z, scale):
    """values * scale where z > 0, else 0."""
    out = np.empty_like(values)
    for i in range(values.shape[0]):
        for j in range(values.shape[1]):
            out[i, j] = values[i, j] * scale[i, j] if z[i, j] > 0.0 else 0.0
    return out


@njit(cache=True, nogil=True)
def _dropout_mask(uniforms, dropout):
    out = np.empty_like(uniforms)
    for i in range(uniforms.shape[0]):
        for j in range(uniforms.shape[1]):
            out[i, j] = 1.0 / (1.0 - dropout) if uniforms[i, j] >= dropout else 0.0
    return out


@njit(cache=True, nogil=True)
def _loss_and_gradients(w1, b1, w2, b2, w3, b3, X, y, mask1, mask2):
    """Mean squared error and its gradients. Masks scale the hidden activations."""
    n = X.shape[0]
    z1 = np.dot(X, w1) + b1
    a1 = np.maximum(z1, 0.0) * mask1
    z2 = np.dot(a1, w2) + b2
    a2 = np.maximum(z2, 0.0) * mask2
    out = np.dot(a2, w3) + b3[0]
    diff = out - y
    loss = np.sum(diff * diff) / n

    d_out = 2.0 * diff / n
    g_w3 = np.dot(np.ascontiguousarray(a2.T), d_out)
    g_b3 = np.array([np.sum(d_out)])
    d_z2 = _gate(np.outer(d_out, w3), z2, mask2)
    g_w2 = np.dot(np.ascontiguousarray(a1.T), d_z2)
    g_b2 = d_z2.sum(axis=0)
    d_z1 = _gate(np.dot(d_z2, np.ascontiguousarray(w2.T)), z1, mask1)
    g_w1 = np.dot(np.ascontiguousarray(X.T), d_z1)
    g_b1 = d_z1.sum(axis=0)
    return loss, g_w1, g_b1, g_w2, g_b2, g_w3, g_b3


@njit(cache=True, nogil=True)
def _sgd_epoch(
    params,
    velocity,
    X,
    y,
    order,
    uniforms1,
    uniforms2,
    dropout,
    learning_rate,
    momentum,
    decay,
    step,
    batch_size,
):
    """One pass of momentum SGD over `order`. Returns the step count and mean loss."""
    w1, b1, w2, b2, w3, b3 = params
    v_w1, v_b1, v_w2, v_b2, v_w3, v_b3 = velocity
    n = order.shape[0]
    total = 0.0
    for start in range(0, n, batch_size):
        rows = order[start : start + batch_size]
        Xb = np.ascontiguousarray(X[rows])
        yb = y[rows]
        mask1 = _dropout_mask(uniforms1[rows], dropout)
        mask2 = _dropout_mask(uniforms2[rows], dropout)
        loss, g_w1, g_b1, g_w2, g_b2, g_w3, g_b3 = _loss_and_gradients(
            w1, b1, w2, b2, w3, b3, Xb, yb, mask1, mask2
        )
        if not np.isfinite(loss):
            return step, loss
        total += loss * rows.shape[0]
        rate = learning_rate / (1.0 + decay * step)
        for param, vel, grad in (
            (w1, v_w1, g_w1),
            (w2, v_w2, g_w2),
        ):
            vel *= momentum
            vel -= rate * grad
            param += vel
        for param, vel, grad in (
            (b1, v_b1, g_b1),
            (b2, v_b2, g_b2),
            (w3, v_w3, g_w3),
            (b3, v_b3, g_b3),
        ):
            vel *= momentum
            vel -= rate * grad
            param += vel
        step += 1
    return step, total / n


@typechecked
def network_loss_and_gradients(
    weights: NetworkWeights, X: np.ndarray, y: np.ndarray
) -> tuple[float, NetworkWeights]:
    """Mean squared error of a network on (X, y) with dropout off, and its gradients.

    The gradients are returned in the weights' layout.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    mask1 = np.ones((X.shape[0], len(weights.b1)))
    mask2 = np.ones((X.shape[0], len(weights.b2)))
    loss, *grads = _loss_and_gradients(*weights.as_arrays(), X, y, mask1, mask2)
    return float(loss), NetworkWeights.from_arrays(tuple(grads))


@typechecked
def fit_network(
    X: np.ndarray,
    y: np.ndarray,
    dense1: int,
    dense2: int,
    dropout: float,
    learning_rate: float,
    momentum: float,
    decay: float,
    epochs: int,
    batch_size: int,
    seed: int,
    validation: tuple[np.ndarray, np.ndarray] | None = None,
) -> tuple[NetworkWeights, tuple[LogEntry, ...], int]:
    """Train a network.

    Without explicit validation rows, 10% of the training rows are held out when there
    are at least 20 rows; otherwise the final epoch's weights are kept.

    Args:
        X: n x d training features.
        y: n training targets.
        dense1: First hidden layer width.
        dense2: Second hidden layer width.
        dropout: Drop probability after each hidden layer during training.
        learning_rate: Initial learning rate.
        momentum: Momentum coefficient.
        decay: Time-based learning-rate decay per update step.
        epochs: Epoch count.
        batch_size: Mini-batch size.
        seed: Root seed of the initialization, shuffles and dropout masks.
        validation: Optional explicit validation rows.

    Returns:
        The restored weights, the per-epoch log, and the best epoch (1-based).

    Raises:
        NonFiniteLoss: If the training loss becomes non-finite.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if validation is None and len(y) >= MIN_ROWS_FOR_INTERNAL_VALIDATION:
        permutation = derive_rng(seed, "validation").permutation(len(y))
        n_valid = max(1, int(round(INTERNAL_VALIDATION_FRACTION * len(y))))
        valid_rows = np.sort(permutation[:n_valid])
        train_rows = np.sort(permutation[n_valid:])
        validation = (X[valid_rows], y[valid_rows])
        X, y = X[train_rows], y[train_rows]

    weights = init_network(X.shape[1], dense1, dense2, derive_rng(seed, "init"))
    params = weights.as_arrays()
    velocity = tuple(np.zeros_like(param) for param in params)
    best = weights
    best_valid = np.inf
    best_epoch = 0
    step = 0
    log: list[LogEntry] = []
    for epoch in range(1, epochs + 1):
        rng = derive_rng(seed, "epoch", epoch)
        order = rng.permutation(len(y))
        uniforms1 = rng.random((len(y), dense1))
        uniforms2 = rng.random((len(y), dense2))
        step, loss = _sgd_epoch(
            params,
            velocity,
            X,
            y,
            order,
            uniforms1,
            uniforms2,
            float(dropout),
            float(learning_rate),
            float(momentum),
            float(decay),
            step,
            batch_size,
        )
        if not np.isfinite(loss):
            raise NonFiniteLoss(
                f"Training loss became non-finite in epoch {epoch} "
                f"(learning_rate={learning_rate}, momentum={momentum})."
            )

        current = NetworkWeights.from_arrays(params)
        train_rmse = float(np.sqrt(np.mean((current.predict(X) - y) ** 2)))
        if validation is None:
            log.append(LogEntry(epoch, train_rmse, np.nan))
            best, best_epoch = current, epoch
            continue
        residual = current.predict(validation[0]) - validation[1]
        valid_rmse = float(np.sqrt(np.mean(residual**2)))
        if not np.isfinite(valid_rmse):
            raise NonFiniteLoss(f"Validation loss became non-finite in epoch {epoch}.")
        log.append(LogEntry(epoch, train_rmse, valid_rmse))
        if valid_rmse < best_valid:
            best, best_valid, best_epoch = current, valid_rmse, epoch

    return best, tuple(log), best_epoch

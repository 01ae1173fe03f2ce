"""Ordinary least squares with an intercept, without regularization."""

import warnings

import numpy as np
from typeguard import typechecked

from fatigue_automl.lib.errors import SingularSystem


@typechecked
def fit_least_squares(X: np.ndarray, y: np.ndarray) -> tuple[float, np.ndarray, int]:
    """Solve min ||y - b0 - X b|| through the singular value decomposition.

    Rank-deficient designs get the minimum-norm solution and a `SingularSystem` warning.

    Args:
        X: n x d features.
        y: n targets.

    Returns:
        The intercept, the d coefficients, and the rank of the design with intercept.
    """
    X = np.asarray(X, dtype=np.float64)
    design = np.column_stack([np.ones(X.shape[0]), X])
    target = np.asarray(y, dtype=np.float64)
    solution, _, rank, _ = np.linalg.lstsq(design, target, rcond=None)
    if rank < design.shape[1]:
        warnings.warn(
            f"Least-squares design has rank {rank} < {design.shape[1]}. "
            "Using the minimum-norm solution.",
            SingularSystem,
            stacklevel=2,
        )
    return float(solution[0]), solution[1:].copy(), int(rank)

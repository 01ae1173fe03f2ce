"""Pearson correlation of real feature columns."""

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
import pandas as pd
from typeguard import typechecked

from fatigue_automl.lib.errors import ConstantColumn

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CorrelationResult:
    """A correlation matrix over the non-constant columns, and the excluded ones."""

    matrix: np.ndarray
    names: tuple[str, ...]
    constant_columns: tuple[ConstantColumn, ...]

    def to_frame(self) -> pd.DataFrame:
        """The matrix, labeled by feature on both axes."""
        return pd.DataFrame(self.matrix, index=list(self.names), columns=list(self.names))


@typechecked
def correlation_matrix(X: np.ndarray, names: Sequence[str]) -> CorrelationResult:
    """Pearson correlation of the columns of X.

    Constant columns have no correlation and are excluded. They are collected as
    `ConstantColumn` errors on the result.

    Args:
        X: n x d reals, n >= 2.
        names: The d column names.

    Returns:
        The symmetric matrix with unit diagonal, clipped to [-1, 1].
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError(f"correlation_matrix needs n >= 2 rows. Got shape {X.shape}.")
    if len(names) != X.shape[1]:
        raise ValueError(f"{len(names)} names for {X.shape[1]} columns.")

    constant = [bool(np.ptp(X[:, j]) == 0) for j in range(X.shape[1])]
    excluded = tuple(
        ConstantColumn(f"Column {name} is constant; excluded from the correlation matrix.")
        for name, flag in zip(names, constant)
        if flag
    )
    for error in excluded:
        logger.warning(str(error))
    kept = [j for j, flag in enumerate(constant) if not flag]
    kept_names = tuple(names[j] for j in kept)
    if not kept:
        return CorrelationResult(np.zeros((0, 0)), kept_names, excluded)

    matrix = np.atleast_2d(np.corrcoef(X[:, kept], rowvar=False))
    matrix = np.clip((matrix + matrix.T) / 2.0, -1.0, 1.0)
    np.fill_diagonal(matrix, 1.0)
    return CorrelationResult(matrix=matrix, names=kept_names, constant_columns=excluded)

"""The fixed train/test split."""

import logging
import math
from pathlib import Path

import numpy as np
from typeguard import typechecked

from fatigue_automl.lib.tabular.dataset import Dataset
from fatigue_automl.lib.utils import derive_rng, dump_json, load_json

logger = logging.getLogger(__name__)


@typechecked
def split_positions(
    n_rows: int, test_fraction: float, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Row positions of a seeded train/test partition.

    Args:
        n_rows: Row count.
        test_fraction: Share of rows for the test partition, in (0, 1).
        seed: Split seed.

    Returns:
        Sorted train positions and sorted test positions. The test partition holds
        ceil(n_rows * test_fraction) rows.
    """
    if not 0 < test_fraction < 1:
        raise ValueError(f"test_fraction must be in (0, 1). Got {test_fraction}.")
    # Tolerance keeps 150 * 0.1 at 15 rows.
    n_test = math.ceil(n_rows * test_fraction - 1e-9)
    if n_rows > 0 and n_test >= n_rows:
        raise ValueError(f"A test fraction of {test_fraction} leaves no training rows.")
    permutation = derive_rng(seed, "split").permutation(n_rows)
    return np.sort(permutation[n_test:]), np.sort(permutation[:n_test])


@typechecked
def train_test_split(ds: Dataset, test_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Split a dataset into disjoint train and test partitions.

    Args:
        ds: The dataset.
        test_fraction: Share of rows for the test partition, in (0, 1).
        seed: Split seed. The same seed always gives the same partition.

    Returns:
        The train and test datasets.
    """
    train_positions, test_positions = split_positions(
        n_rows=ds.n_rows, test_fraction=test_fraction, seed=seed
    )
    logger.info(
        f"Split {ds.n_rows} rows: {len(train_positions)} train, {len(test_positions)} test."
    )
    return ds.take(train_positions), ds.take(test_positions)


@typechecked
def save_split(train: Dataset, test: Dataset, path: Path) -> Path:
    """Persist the row ids of a split."""
    return dump_json(
        {"train_row_ids": train.row_ids.tolist(), "test_row_ids": test.row_ids.tolist()}, path
    )


@typechecked
def load_split(ds: Dataset, path: Path) -> tuple[Dataset, Dataset]:
    """Re-apply a persisted split to a dataset by row id."""
    split = load_json(path)
    position_of = {int(row_id): pos for pos, row_id in enumerate(ds.row_ids)}
    return (
        ds.take([position_of[row_id] for row_id in split["train_row_ids"]]),
        ds.take([position_of[row_id] for row_id in split["test_row_ids"]]),
    )

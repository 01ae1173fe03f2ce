"""DataFrame checks."""

import numpy as np
import pandas as pd
import pandera.extensions as extensions

# NOTE: Registering as dataframe checks instead of field checks includes the columns in the
# error message.


@extensions.register_check_method(statistics=["low_col", "high_col"])
def lower_below_upper(df: pd.DataFrame, low_col: str, high_col: str) -> bool:
    """Check that a lower bound column is strictly below an upper bound column."""
    return bool((df[low_col] < df[high_col]).all())


@extensions.register_check_method(statistics=["narrow_col", "wide_col"])
def implies(df: pd.DataFrame, narrow_col: str, wide_col: str) -> bool:
    """Check that every row flagged in one boolean column is flagged in another.

    A row inside a narrow closed band is inside every wider band.
    """
    return bool((~df[narrow_col].astype(bool) | df[wide_col].astype(bool)).all())


@extensions.register_check_method(statistics=["weight_col"])
def sums_to_one(df: pd.DataFrame, weight_col: str) -> bool:
    """Check that a weight column is non-negative and sums to one."""
    weights = df[weight_col].to_numpy(dtype=float)
    return bool((weights >= 0).all() and np.isclose(weights.sum(), 1.0, atol=1e-9))

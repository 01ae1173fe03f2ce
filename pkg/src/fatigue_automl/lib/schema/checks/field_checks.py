"""Field checks."""

import numpy as np
import pandas as pd
import pandera.extensions as extensions


@extensions.register_check_method(statistics=["start_idx"])
def contiguous(pandas_obj: pd.Series, start_idx: int) -> bool:
    """Assert that values are contiguous."""
    return sorted(pandas_obj.to_list()) == list(
        range(start_idx, len(pandas_obj.to_list()) + start_idx)
    )


@extensions.register_check_method(statistics=["flag"])
def is_sorted_descending(pandas_obj: pd.Series, flag: bool) -> bool:
    """Assert that values are sorted descending."""
    return bool(pandas_obj.is_monotonic_decreasing) if flag else True


@extensions.register_check_method(statistics=["flag"])
def non_negative_or_nan(pandas_obj: pd.Series, flag: bool) -> bool:
    """Assert that values are non-negative, allowing NaN for undefined statistics."""
    values = pandas_obj.to_numpy(dtype=float)
    return bool(np.all(np.isnan(values) | (values >= 0))) if flag else True

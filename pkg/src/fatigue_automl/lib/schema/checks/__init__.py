"""Schema checks."""

from fatigue_automl.lib.schema.checks.dataframe_checks import (
    implies,
    lower_below_upper,
    sums_to_one,
)
from fatigue_automl.lib.schema.checks.field_checks import (
    contiguous,
    is_sorted_descending,
    non_negative_or_nan,
)

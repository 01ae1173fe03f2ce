"""Engineered geometric features."""

import logging

import numpy as np
from typeguard import typechecked

from fatigue_automl.lib.constants import Columns
from fatigue_automl.lib.errors import SchemaMismatch
from fatigue_automl.lib.tabular.dataset import Dataset
from fatigue_automl.lib.tabular.feature_schema import derived_spec

logger = logging.getLogger(__name__)


@typechecked
def derive_overhang(w_BP: np.ndarray | float, l_S: np.ndarray | float) -> np.ndarray:
    """Overhang of the base plate beyond the stiffener: (w_BP - l_S) / 2, in mm.

    Negative values are returned as they are.
    """
    return (np.asarray(w_BP, dtype=np.float64) - np.asarray(l_S, dtype=np.float64)) / 2.0


@typechecked
def add_overhang(ds: Dataset) -> Dataset:
    """Replace base plate width and stiffener length by the derived overhang.

    The overhang is missing where either input is.

    Raises:
        SchemaMismatch: If either input column is absent.
    """
    for name in (Columns.BASE_PLATE_WIDTH, Columns.STIFFENER_LENGTH):
        if name not in ds:
            raise SchemaMismatch(f"Overhang needs column {name!r}.")
    width = ds.column(Columns.BASE_PLATE_WIDTH)
    length = ds.column(Columns.STIFFENER_LENGTH)
    missing = np.ma.getmaskarray(width) | np.ma.getmaskarray(length)
    overhang = derive_overhang(width.data, length.data)
    overhang[missing] = np.nan

    n_negative = int((overhang[~missing] < 0).sum())
    if n_negative:
        logger.warning(f"{n_negative} rows have a negative overhang.")

    spec = derived_spec(ds.schema.spec(Columns.BASE_PLATE_WIDTH), Columns.OVERHANG)
    return ds.with_column(spec, overhang, mask=missing).drop_columns(
        [Columns.BASE_PLATE_WIDTH, Columns.STIFFENER_LENGTH]
    )

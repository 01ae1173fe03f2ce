"""Immutable column-major table with a per-cell missingness mask."""

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any, Final

import numpy as np
import pandas as pd

from fatigue_automl.lib.constants import ColumnKind
from fatigue_automl.lib.errors import RangeViolation, SchemaMismatch
from fatigue_automl.lib.tabular.feature_schema import ColumnSpec, FeatureSchema


class _Absent:
    """Marker returned for masked cells."""

    _instance: "_Absent | None" = None

    def __new__(cls) -> "_Absent":  # noqa: D102
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:  # noqa: D105
        return "ABSENT"

    def __bool__(self) -> bool:  # noqa: D105
        return False

    def __reduce__(self) -> str:  # noqa: D105
        return "ABSENT"


ABSENT: Final = _Absent()


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class Dataset:
    """A typed table.

    Real columns are float64 arrays, binary and categorical columns are object arrays of
    level strings. Masked cells are not readable through `value`, `column` or `observed`.
    Build through `Dataset.from_arrays`.
    """

    schema: FeatureSchema
    row_ids: np.ndarray
    _values: Mapping[str, np.ndarray] = field(repr=False)
    _mask: Mapping[str, np.ndarray] = field(repr=False)
    violations: tuple[RangeViolation, ...] = ()

    @classmethod
    def from_arrays(
        cls,
        schema: FeatureSchema,
        values: Mapping[str, Sequence | np.ndarray],
        mask: Mapping[str, Sequence | np.ndarray] | None = None,
        row_ids: Sequence[int] | np.ndarray | None = None,
        violations: Sequence[RangeViolation] = (),
    ) -> "Dataset":
        """Build a dataset, validating column lengths and observed cells.

        Args:
            schema: Schema covering exactly the given columns.
            values: Column name to values. For real columns, NaN cells are masked.
                For other columns, None cells are masked.
            mask: Column name to boolean mask (True = missing). Merged with the
                NaN/None cells of `values`.
            row_ids: Stable row identifiers. Defaults to 0..n-1.
            violations: Range violations recorded at ingestion.

        Returns:
            The dataset.

        Raises:
            SchemaMismatch: If columns differ from the schema, lengths differ, or an
                observed cell is non-finite or outside its level set.
        """
        mask = mask or {}
        if set(values) != set(schema.names):
            raise SchemaMismatch(
                f"Columns {sorted(set(values) ^ set(schema.names))} do not match schema."
            )
        lengths = {len(values[name]) for name in schema.names}
        if len(lengths) > 1:
            raise SchemaMismatch(f"Column lengths differ: {sorted(lengths)}")
        n_rows = lengths.pop() if lengths else 0

        stored_values: dict[str, np.ndarray] = {}
        stored_mask: dict[str, np.ndarray] = {}
        for spec in schema.columns:
            column, missing = _coerce_column(spec, values[spec.name], mask.get(spec.name))
            stored_values[spec.name] = _frozen(column)
            stored_mask[spec.name] = _frozen(missing)

        ids = np.arange(n_rows, dtype=np.int64) if row_ids is None else np.asarray(row_ids)
        if ids.shape != (n_rows,):
            raise SchemaMismatch("row_ids length differs from column length.")
        return cls(
            schema=schema,
            row_ids=_frozen(ids.astype(np.int64)),
            _values=stored_values,
            _mask=stored_mask,
            violations=tuple(violations),
        )

    @property
    def n_rows(self) -> int:
        """Row count."""
        return len(self.row_ids)

    @property
    def names(self) -> list[str]:
        """Column names in schema order."""
        return self.schema.names

    def __contains__(self, name: object) -> bool:  # noqa: D105
        return name in self._values

    def value(self, row: int, name: str) -> Any:
        """Read one cell by position. Masked cells read as ABSENT."""
        if self._mask[name][row]:
            return ABSENT
        value = self._values[name][row]
        return float(value) if self.schema.spec(name).kind == ColumnKind.REAL else value

    def mask(self, name: str) -> np.ndarray:
        """Boolean missingness of one column (True = missing)."""
        return self._mask[name].copy()

    def column(self, name: str) -> np.ma.MaskedArray:
        """One column as a masked array."""
        return np.ma.MaskedArray(self._values[name].copy(), mask=self._mask[name].copy())

    def observed(self, name: str) -> np.ndarray:
        """The non-missing values of one column, in row order."""
        return self._values[name][~self._mask[name]].copy()

    def n_missing(self, name: str) -> int:
        """Missing cell count of one column."""
        return int(self._mask[name].sum())

    def take(self, positions: Sequence[int] | np.ndarray) -> "Dataset":
        """The rows at the given positions, keeping their row ids."""
        positions = np.asarray(positions, dtype=np.int64)
        kept_ids = set(self.row_ids[positions].tolist())
        return Dataset(
            schema=self.schema,
            row_ids=_frozen(self.row_ids[positions]),
            _values={name: _frozen(arr[positions]) for name, arr in self._values.items()},
            _mask={name: _frozen(arr[positions]) for name, arr in self._mask.items()},
            violations=tuple(v for v in self.violations if v.row in kept_ids),
        )

    def with_column(
        self,
        spec: ColumnSpec,
        values: Sequence | np.ndarray,
        mask: Sequence[bool] | np.ndarray | None = None,
    ) -> "Dataset":
        """A dataset with one column added or replaced."""
        schema = self.schema.with_column(spec)
        all_values = {name: self._values[name] for name in self.names}
        all_values[spec.name] = values
        all_mask = {name: self._mask[name] for name in self.names}
        all_mask[spec.name] = np.zeros(self.n_rows, dtype=bool) if mask is None else mask
        return Dataset.from_arrays(
            schema=schema,
            values=all_values,
            mask=all_mask,
            row_ids=self.row_ids,
            violations=self.violations,
        )

    def drop_columns(self, names: Sequence[str]) -> "Dataset":
        """A dataset without the named feature columns."""
        schema = self.schema.without(list(names))
        return Dataset(
            schema=schema,
            row_ids=self.row_ids,
            _values={name: self._values[name] for name in schema.names},
            _mask={name: self._mask[name] for name in schema.names},
            violations=tuple(v for v in self.violations if v.column in schema),
        )

    def to_frame(self) -> pd.DataFrame:
        """The dataset as a DataFrame, with NaN (reals) or None (levels) at masked cells.

        Indexed by row id.
        """
        data = {}
        for spec in self.schema.columns:
            values = self._values[spec.name]
            if spec.kind == ColumnKind.REAL:
                data[spec.name] = np.where(self._mask[spec.name], np.nan, values)
            else:
                data[spec.name] = np.where(self._mask[spec.name], None, values)
        return pd.DataFrame(data, index=pd.Index(self.row_ids, name="row_id"))


def _coerce_column(
    spec: ColumnSpec, values: Sequence | np.ndarray, mask: Sequence | np.ndarray | None
) -> tuple[np.ndarray, np.ndarray]:
    if spec.kind == ColumnKind.REAL:
        column = np.asarray(values, dtype=np.float64)
        missing = np.isnan(column)
        if mask is not None:
            missing = missing | np.asarray(mask, dtype=bool)
        if not np.isfinite(column[~missing]).all():
            raise SchemaMismatch(f"{spec.name}: observed real cells must be finite.")
        column = np.where(missing, np.nan, column)
    else:
        column = np.empty(len(values), dtype=object)
        column[:] = list(values)
        missing = np.array([val is None for val in column], dtype=bool)
        if mask is not None:
            missing = missing | np.asarray(mask, dtype=bool)
        levels = set(spec.levels or ())
        unknown = {val for val in column[~missing] if val not in levels}
        if unknown:
            raise SchemaMismatch(f"{spec.name}: unknown levels {sorted(map(str, unknown))}.")
        column[missing] = None
    return column, missing

"""CSV ingestion with schema validation."""

import logging
from collections.abc import Sequence
from pathlib import Path

import numpy as np
import pandas as pd
import pandera.pandas as pa
from pandera.errors import SchemaErrors
from pandera.typing import DataFrame
from typeguard import typechecked

from fatigue_automl.lib.constants import (
    CSV_ENCODING,
    MISSING_TOKENS,
    ColumnKind,
    TableColumns,
)
from fatigue_automl.lib.errors import MissingColumn, ParseError, RangeViolation
from fatigue_automl.lib.schema import Violations
from fatigue_automl.lib.schema.utils import schema_error_handler
from fatigue_automl.lib.tabular.dataset import Dataset
from fatigue_automl.lib.tabular.feature_schema import FeatureSchema

logger = logging.getLogger(__name__)


@typechecked
def load_csv(
    path: Path, schema: FeatureSchema, missing_tokens: Sequence[str] = MISSING_TOKENS
) -> Dataset:
    """Read a fatigue test CSV into a Dataset.

    Columns are mapped by header name; extra CSV columns are ignored. Cells equal to a
    missing token (after stripping whitespace) are masked. Real cells are parsed as
    decimal numbers with "." as decimal point.

    Out-of-range real cells are kept and recorded. Cells with an unknown level are
    recorded and masked.

    Args:
        path: The CSV file (UTF-8, comma separated, with header row).
        schema: The schema to map and validate against.
        missing_tokens: Cell contents meaning "missing".

    Returns:
        The Dataset, with range violations in `Dataset.violations`.

    Raises:
        FileNotFoundError: If the file does not exist.
        MissingColumn: If a required column is absent from the header.
        ParseError: If an observed real cell is not a finite decimal number.
    """
    if not path.is_file():
        raise FileNotFoundError(f"Input CSV not found: {path}")

    raw = pd.read_csv(
        path, dtype=str, keep_default_na=False, encoding=CSV_ENCODING, skipinitialspace=True
    )
    raw.columns = [str(col).strip() for col in raw.columns]
    for spec in schema.columns:
        if spec.name not in raw.columns and spec.required:
            raise MissingColumn(spec.name)

    tokens = set(missing_tokens)
    parsed: dict[str, pd.Series] = {}
    for spec in schema.columns:
        if spec.name not in raw.columns:
            logger.info(f"Optional column {spec.name} absent. Reading as fully missing.")
            parsed[spec.name] = pd.Series(
                np.nan if spec.kind == ColumnKind.REAL else None,
                index=raw.index,
                dtype=float if spec.kind == ColumnKind.REAL else object,
            )
            continue
        cells = raw[spec.name].str.strip()
        missing = cells.isin(tokens)
        if spec.kind == ColumnKind.REAL:
            parsed[spec.name] = _parse_reals(cells=cells, missing=missing, column=spec.name)
        else:
            parsed[spec.name] = cells.where(~missing, None).astype(object)

    frame = pd.DataFrame(parsed, index=raw.index)
    violations = _collect_violations(frame=frame, schema=schema)
    if violations:
        logger.warning(f"{path}: {len(violations)} cells outside their range or level set.")
    for violation in violations:
        if schema.spec(violation.column).kind != ColumnKind.REAL:
            frame.at[violation.row, violation.column] = None

    logger.info(f"Read {len(frame)} rows from {path}.")
    return Dataset.from_arrays(
        schema=schema,
        values={name: frame[name].to_numpy() for name in schema.names},
        row_ids=np.arange(len(frame), dtype=np.int64),
        violations=violations,
    )


def _parse_reals(cells: pd.Series, missing: pd.Series, column: str) -> pd.Series:
    values = pd.to_numeric(cells.where(~missing, None), errors="coerce")
    bad = ~missing & ~np.isfinite(values.to_numpy(dtype=float))
    if bad.any():
        row = int(np.flatnonzero(bad.to_numpy())[0])
        raise ParseError(
            row=row,
            column=column,
            value=cells.iloc[row],
            message=f"Row {row}, column {column!r}: {cells.iloc[row]!r} is not a number.",
        )
    return values.astype(float)


def _validation_schema(schema: FeatureSchema) -> pa.DataFrameSchema:
    columns = {}
    for spec in schema.columns:
        if spec.kind == ColumnKind.REAL:
            checks = [pa.Check.in_range(spec.low, spec.high)] if spec.has_range else []
            columns[spec.name] = pa.Column(float, checks=checks, nullable=True)
        else:
            columns[spec.name] = pa.Column(
                object, checks=[pa.Check.isin(list(spec.levels or ()))], nullable=True
            )
    return pa.DataFrameSchema(columns=columns, strict=False)


def _collect_violations(frame: pd.DataFrame, schema: FeatureSchema) -> list[RangeViolation]:
    try:
        _validation_schema(schema).validate(frame, lazy=True)
    except SchemaErrors as e:
        cases = e.failure_cases
        cases = cases[cases["index"].notna() & cases["column"].isin(schema.names)]
        violations = [
            RangeViolation(
                row=int(case["index"]), column=case["column"], value=case["failure_case"]
            )
            for _, case in cases.iterrows()
        ]
        return sorted(violations, key=lambda v: (v.row, schema.names.index(v.column)))
    return []


@schema_error_handler
@pa.check_types(lazy=True)
def violations_frame(violations: Sequence[RangeViolation]) -> DataFrame[Violations]:
    """Range violations as a (row, column, value) table."""
    return pd.DataFrame(
        {
            TableColumns.ROW: [v.row for v in violations],
            TableColumns.COLUMN: [v.column for v in violations],
            TableColumns.VALUE: [str(v.value) for v in violations],
        },
        columns=[TableColumns.ROW, TableColumns.COLUMN, TableColumns.VALUE],
    )

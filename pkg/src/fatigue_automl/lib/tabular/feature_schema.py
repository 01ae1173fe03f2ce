"""Typed column catalog of the fatigue test records."""

import configparser
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

from typeguard import typechecked

from fatigue_automl.lib.constants import (
    DIMENSIONLESS,
    ColumnKind,
    Columns,
    PostTreatment,
    WeldType,
)
from fatigue_automl.lib.errors import ConfigError

logger = logging.getLogger(__name__)

_COLUMN_SECTION_PREFIX = "column:"
_TARGETS_SECTION = "targets"
_LIST_SEP = ","


@dataclass(frozen=True)
class ColumnSpec:
    """One column of the feature schema.

    Args:
        name: Column identifier, as in the CSV header.
        kind: Semantic kind.
        unit: Physical unit, "-" for dimensionless.
        low: Lower bound of the closed allowed range (real kinds only).
        high: Upper bound of the closed allowed range (real kinds only).
        levels: Allowed levels (binary and categorical kinds). The first binary level
            encodes to 0.
        required: Whether the column must appear in a CSV header. Absent optional
            columns are read as fully missing.
    """

    name: str
    kind: ColumnKind
    unit: str = DIMENSIONLESS
    low: float | None = None
    high: float | None = None
    levels: tuple[str, ...] | None = None
    required: bool = True

    def __post_init__(self) -> None:
        """Validate the column."""
        if not self.name:
            raise ValueError("Column name must be non-empty.")
        object.__setattr__(self, "kind", ColumnKind(self.kind))
        if (self.low is None) != (self.high is None):
            raise ValueError(f"{self.name}: range needs both low and high.")
        if self.low is not None and not self.low < self.high:  # type: ignore[operator]
            raise ValueError(f"{self.name}: range low must be below high.")
        if self.kind == ColumnKind.REAL:
            if self.levels is not None:
                raise ValueError(f"{self.name}: real columns have no levels.")
        else:
            if self.low is not None:
                raise ValueError(f"{self.name}: only real columns have a range.")
            if not self.levels:
                raise ValueError(f"{self.name}: {self.kind} columns need levels.")
            if len(set(self.levels)) != len(self.levels):
                raise ValueError(f"{self.name}: levels must be unique.")
            if self.kind == ColumnKind.BINARY and len(self.levels) != 2:
                raise ValueError(f"{self.name}: binary columns need exactly two levels.")

    @property
    def has_range(self) -> bool:
        """Whether the column carries an allowed range."""
        return self.low is not None


@dataclass(frozen=True)
class FeatureSchema:
    """Ordered column catalog plus the target names."""

    columns: tuple[ColumnSpec, ...]
    target_names: tuple[str, ...]
    _by_name: dict[str, ColumnSpec] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        """Validate and index the columns."""
        names = [spec.name for spec in self.columns]
        if len(set(names)) != len(names):
            duplicates = sorted({name for name in names if names.count(name) > 1})
            raise ValueError(f"Duplicate column names: {duplicates}")
        for target in self.target_names:
            if names.count(target) != 1:
                raise ValueError(f"Target {target!r} must appear exactly once.")
        if len(set(self.target_names)) != len(self.target_names):
            raise ValueError("Duplicate target names.")
        object.__setattr__(self, "_by_name", {spec.name: spec for spec in self.columns})

    @property
    def names(self) -> list[str]:
        """All column names, in order."""
        return [spec.name for spec in self.columns]

    @property
    def feature_names(self) -> list[str]:
        """Column names that are not targets, in order."""
        return [spec.name for spec in self.columns if spec.name not in self.target_names]

    def __contains__(self, name: object) -> bool:  # noqa: D105
        return name in self._by_name

    def spec(self, name: str) -> ColumnSpec:
        """Look up a column spec by name."""
        try:
            return self._by_name[name]
        except KeyError:
            raise KeyError(f"Column {name!r} not in schema.") from None

    def names_of_kind(self, kind: ColumnKind) -> list[str]:
        """Feature column names of one kind, in order."""
        return [name for name in self.feature_names if self._by_name[name].kind == kind]

    def with_column(self, spec: ColumnSpec) -> "FeatureSchema":
        """A schema with one more (or one replaced) column."""
        if spec.name in self:
            columns = tuple(spec if col.name == spec.name else col for col in self.columns)
        else:
            columns = (*self.columns, spec)
        return FeatureSchema(columns=columns, target_names=self.target_names)

    def without(self, names: list[str]) -> "FeatureSchema":
        """A schema without the named feature columns."""
        dropped = set(names)
        if dropped & set(self.target_names):
            raise ValueError("Targets cannot be dropped from a schema.")
        return FeatureSchema(
            columns=tuple(col for col in self.columns if col.name not in dropped),
            target_names=self.target_names,
        )


@typechecked
def default_schema() -> FeatureSchema:
    """The schema of the transverse stiffener fatigue test table.

    Ranges and kinds follow the published feature table. `Weld_position` (EN ISO 6947)
    and `Weld_process` (EN ISO 4063 groups) are optional columns used by the extended
    hypotheses.

    Returns:
        The default FeatureSchema.
    """
    real = ColumnKind.REAL
    mm = "mm"
    mpa = "MPa"
    columns = (
        ColumnSpec(Columns.SCALE, ColumnKind.BINARY, levels=("small", "large")),
        ColumnSpec(Columns.LOADING, ColumnKind.BINARY, levels=("axial", "bending")),
        ColumnSpec(Columns.AMPLITUDE, ColumnKind.BINARY, levels=("constant", "variable")),
        ColumnSpec(Columns.FREQUENCY, real, "Hz", 1.0, 32.0),
        ColumnSpec(Columns.YIELD_STRENGTH, real, mpa, 235.0, 1125.0),
        ColumnSpec(Columns.TENSILE_STRENGTH, real, mpa, 275.0, 1420.0),
        ColumnSpec(
            Columns.PRE_TREAT, ColumnKind.CATEGORICAL, levels=("none", "heat", "other")
        ),
        ColumnSpec(
            Columns.POST_TREAT,
            ColumnKind.CATEGORICAL,
            levels=(
                PostTreatment.AS_WELDED,
                PostTreatment.TIG_DRESSING,
                PostTreatment.GRINDING,
                PostTreatment.HFMI,
                PostTreatment.HEAT,
            ),
        ),
        ColumnSpec(
            Columns.WELD_TYPE, ColumnKind.CATEGORICAL, levels=(WeldType.FILLET, WeldType.BUTT)
        ),
        ColumnSpec(Columns.FILLER_YIELD_STRENGTH, real, mpa, 200.0, 800.0),
        ColumnSpec(Columns.FILLER_TENSILE_STRENGTH, real, mpa, 300.0, 900.0),
        ColumnSpec(Columns.BASE_PLATE_LENGTH, real, mm, 50.0, 2000.0),
        ColumnSpec(Columns.BASE_PLATE_WIDTH, real, mm, 10.0, 500.0),
        ColumnSpec(Columns.BASE_PLATE_THICKNESS, real, mm, 1.0, 100.0),
        ColumnSpec(Columns.STIFFENER_HEIGHT, real, mm, 5.0, 300.0),
        ColumnSpec(Columns.STIFFENER_LENGTH, real, mm, 10.0, 1000.0),
        ColumnSpec(Columns.STIFFENER_THICKNESS, real, mm, 1.0, 50.0),
        ColumnSpec(Columns.WELD_THICKNESS, real, mm, 1.0, 20.0),
        ColumnSpec(Columns.CORROSION, ColumnKind.BINARY, levels=("no", "yes")),
        ColumnSpec(Columns.STRESS_RATIO, real, DIMENSIONLESS, -1.0, 0.8),
        ColumnSpec(Columns.STRESS_RANGE, real, mpa, 50.0, 1125.0),
        ColumnSpec(
            Columns.WELD_POSITION,
            ColumnKind.CATEGORICAL,
            levels=("PA", "PB", "PC", "PD", "PE", "PF", "PG"),
            required=False,
        ),
        ColumnSpec(
            Columns.WELD_PROCESS,
            ColumnKind.CATEGORICAL,
            levels=("111", "12", "13", "14", "other"),
            required=False,
        ),
        # Cycle counts are unbounded in the raw records.
        ColumnSpec(Columns.CYCLES, real, DIMENSIONLESS, required=False),
        ColumnSpec(Columns.FATIGUE_STRENGTH, real, mpa, 0.0, 500.0),
    )
    return FeatureSchema(
        columns=columns, target_names=(Columns.FATIGUE_STRENGTH, Columns.CYCLES)
    )


@typechecked
def load_schema(path: Path) -> FeatureSchema:
    """Read a schema INI file.

    Each column is a `[column:<name>]` section with keys `kind`, `unit`, `low`, `high`,
    `levels` (comma separated) and `required`. The `[targets]` section lists `names`.

    Args:
        path: The schema file.

    Returns:
        The FeatureSchema.

    Raises:
        ConfigError: On unknown sections or bad values.
    """
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # type: ignore[assignment, method-assign]
    if not parser.read(path, encoding="utf-8"):
        raise FileNotFoundError(f"Schema file not found: {path}")

    columns = []
    target_names: tuple[str, ...] = ()
    for section in parser.sections():
        if section == _TARGETS_SECTION:
            target_names = _split_list(parser.get(section, "names", fallback=""))
            continue
        if not section.startswith(_COLUMN_SECTION_PREFIX):
            raise ConfigError(f"Unknown schema section [{section}] in {path}")
        name = section.removeprefix(_COLUMN_SECTION_PREFIX)
        body = parser[section]
        try:
            levels = _split_list(body["levels"]) if "levels" in body else None
            columns.append(
                ColumnSpec(
                    name=name,
                    kind=ColumnKind(body.get("kind", ColumnKind.REAL)),
                    unit=body.get("unit", DIMENSIONLESS),
                    low=body.getfloat("low"),
                    high=body.getfloat("high"),
                    levels=levels,
                    required=body.getboolean("required", fallback=True),
                )
            )
        except ValueError as e:
            raise ConfigError(f"Bad schema section [{section}] in {path}: {e}") from e

    try:
        return FeatureSchema(columns=tuple(columns), target_names=target_names)
    except ValueError as e:
        raise ConfigError(f"Bad schema in {path}: {e}") from e


@typechecked
def save_schema(schema: FeatureSchema, path: Path) -> Path:
    """Write a schema INI file readable by `load_schema`."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # type: ignore[assignment, method-assign]
    for spec in schema.columns:
        section: dict[str, str] = {"kind": str(spec.kind), "unit": spec.unit}
        if spec.has_range:
            section["low"] = repr(spec.low)
            section["high"] = repr(spec.high)
        if spec.levels is not None:
            section["levels"] = f"{_LIST_SEP} ".join(spec.levels)
        section["required"] = str(spec.required).lower()
        parser[f"{_COLUMN_SECTION_PREFIX}{spec.name}"] = section
    parser[_TARGETS_SECTION] = {"names": f"{_LIST_SEP} ".join(schema.target_names)}
    with open(path, "w", encoding="utf-8") as handle:
        parser.write(handle)
    return path


def _split_list(raw: str) -> tuple[str, ...]:
    return tuple(item.strip() for item in raw.split(_LIST_SEP) if item.strip())


@typechecked
def derived_spec(spec: ColumnSpec, name: str) -> ColumnSpec:
    """A range-free copy of a spec under a new name, for derived columns."""
    return replace(spec, name=name, low=None, high=None, required=False)

"""Fatigue model hypotheses: nested feature sets."""

from collections.abc import Sequence
from dataclasses import dataclass
from typing import Final

from typeguard import typechecked

from fatigue_automl.lib.constants import Columns, Hypothesis
from fatigue_automl.lib.errors import SchemaMismatch
from fatigue_automl.lib.tabular.feature_schema import FeatureSchema


@dataclass(frozen=True)
class HypothesisConfig:
    """A named feature set."""

    name: Hypothesis
    features: tuple[str, ...]


_BASE_FEATURES: Final[tuple[str, ...]] = (
    # Geometry.
    Columns.BASE_PLATE_LENGTH,
    Columns.STIFFENER_HEIGHT,
    Columns.BASE_PLATE_THICKNESS,
    Columns.STIFFENER_THICKNESS,
    Columns.WELD_THICKNESS,
    # Material.
    Columns.YIELD_STRENGTH,
    Columns.TENSILE_STRENGTH,
    # Loading.
    Columns.STRESS_RATIO,
    Columns.STRESS_RANGE,
    Columns.LOADING,
    Columns.SCALE,
    Columns.POST_TREAT,
)
_WELDING_FEATURES: Final[tuple[str, ...]] = (Columns.WELD_POSITION, Columns.WELD_PROCESS)
_PROCESS_FEATURES: Final[tuple[str, ...]] = (
    Columns.FREQUENCY,
    Columns.FILLER_YIELD_STRENGTH,
    Columns.FILLER_TENSILE_STRENGTH,
    Columns.PRE_TREAT,
)

HYPOTHESES: Final[dict[Hypothesis, HypothesisConfig]] = {
    Hypothesis.M1: HypothesisConfig(Hypothesis.M1, _BASE_FEATURES),
    Hypothesis.M2: HypothesisConfig(Hypothesis.M2, (*_BASE_FEATURES, *_WELDING_FEATURES)),
    Hypothesis.M3: HypothesisConfig(
        Hypothesis.M3, (*_BASE_FEATURES, *_WELDING_FEATURES, *_PROCESS_FEATURES)
    ),
}


@typechecked
def hypothesis(name: Hypothesis | str) -> HypothesisConfig:
    """Look up a hypothesis by name ("M1", "M2" or "M3")."""
    return HYPOTHESES[Hypothesis(name)]


@typechecked
def resolve_features(
    config: HypothesisConfig,
    schema: FeatureSchema,
    extra: Sequence[str] = (),
    drop: Sequence[str] = (),
) -> list[str]:
    """A hypothesis' features plus extras, minus drops, in schema order.

    Raises:
        SchemaMismatch: If a resolved feature is not a schema feature column.
    """
    wanted = (set(config.features) | set(extra)) - set(drop)
    missing = sorted(wanted - set(schema.feature_names))
    if missing:
        raise SchemaMismatch(f"Hypothesis {config.name} needs absent columns {missing}.")
    return [name for name in schema.feature_names if name in wanted]

"""Synthetic fatigue test records with a planted, known strength formula."""

import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from typeguard import typechecked

from fatigue_automl.lib.constants import (
    BASQUIN_SLOPE,
    REFERENCE_CYCLES,
    Columns,
    ColumnKind,
    PostTreatment,
    SynthFiles,
    WeldType,
)
from fatigue_automl.lib.tabular.dataset import Dataset
from fatigue_automl.lib.tabular.feature_schema import (
    ColumnSpec,
    FeatureSchema,
    default_schema,
)
from fatigue_automl.lib.utils import derive_rng, dump_json

logger = logging.getLogger(__name__)

# Strength is clipped into this interval (MPa). Not binding for the default effects.
_STRENGTH_CLIP = (1.0, 500.0)

# Level shares, most frequent first. Axial loading and the as-welded state dominate.
_LEVEL_SHARES: dict[str, dict[str, float]] = {
    Columns.SCALE: {"small": 0.7, "large": 0.3},
    Columns.LOADING: {"axial": 0.85, "bending": 0.15},
    Columns.AMPLITUDE: {"constant": 0.9, "variable": 0.1},
    Columns.PRE_TREAT: {"none": 0.9, "heat": 0.05, "other": 0.05},
    Columns.POST_TREAT: {
        PostTreatment.AS_WELDED: 0.65,
        PostTreatment.TIG_DRESSING: 0.15,
        PostTreatment.GRINDING: 0.1,
        PostTreatment.HFMI: 0.07,
        PostTreatment.HEAT: 0.03,
    },
    Columns.WELD_TYPE: {WeldType.FILLET: 0.8, WeldType.BUTT: 0.2},
    Columns.CORROSION: {"no": 0.95, "yes": 0.05},
    Columns.WELD_POSITION: {
        "PA": 0.6,
        "PB": 0.25,
        "PC": 0.05,
        "PD": 0.03,
        "PE": 0.03,
        "PF": 0.02,
        "PG": 0.02,
    },
    Columns.WELD_PROCESS: {"111": 0.4, "13": 0.4, "12": 0.1, "14": 0.05, "other": 0.05},
}

_STEEL_GRADES = np.array([235.0, 275.0, 355.0, 460.0, 690.0, 960.0])


@dataclass(frozen=True)
class SynthConfig:
    """Generator settings.

    Effect sizes are in decadic-log MPa per unit of their regressor. The strength formula
    is::

        log10(dsigma_c50) = base + r_slope * R + yield_slope * R_eH / 1000
            + tig_uplift * [Post_Treat is TIG dressing]
            + thickness_slope * log10(t_BP / 25) + height_slope * (h_S / 100 - 0.5)
            + ratio_slope * (log10(w_BP / t_BP) - 1)   (planted_ratio_feature only)
            + noise
    """

    n_rows: int = 1000
    noise_std_log10: float = 0.05
    base: float = 1.75
    r_slope: float = -0.3
    yield_slope: float = 0.15
    tig_uplift: float = 0.12
    thickness_slope: float = -0.05
    height_slope: float = -0.02
    ratio_slope: float = 0.3
    planted_collinear: bool = False
    planted_ratio_feature: bool = False
    seed: int = 0
    missing_rates: dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        """Validate the settings."""
        if self.n_rows < 10:
            raise ValueError(f"n_rows must be at least 10. Got {self.n_rows}.")
        if self.noise_std_log10 < 0:
            raise ValueError(
                f"noise_std_log10 must be non-negative. Got {self.noise_std_log10}."
            )
        for column, rate in self.missing_rates.items():
            if not 0 <= rate < 1:
                raise ValueError(f"Missing rate of {column} must be in [0, 1). Got {rate}.")
            if column == Columns.FATIGUE_STRENGTH:
                raise ValueError("The target cannot have missing values.")


@typechecked
def synthetic_schema(cfg: SynthConfig) -> FeatureSchema:
    """The default schema, plus the planted collinear column when configured."""
    schema = default_schema()
    if cfg.planted_collinear:
        schema = schema.with_column(
            ColumnSpec(Columns.PLANTED_COLLINEAR, ColumnKind.REAL, unit="mm", required=False)
        )
    return schema


@typechecked
def generate_synthetic(cfg: SynthConfig) -> Dataset:
    """Draw a synthetic dataset on the fatigue test schema.

    Every column is drawn from its own seeded stream, so the same config always yields
    the same dataset. All real values fall inside their schema ranges.

    Args:
        cfg: Generator settings.

    Returns:
        The dataset, including both targets.
    """
    n = cfg.n_rows
    schema = synthetic_schema(cfg)
    values: dict[str, Any] = {}

    for column, shares in _LEVEL_SHARES.items():
        rng = derive_rng(cfg.seed, column)
        levels = list(shares)
        draws = rng.choice(len(levels), size=n, p=np.array(list(shares.values())))
        values[column] = np.array([levels[i] for i in draws], dtype=object)

    def uniform(column: str, low: float, high: float) -> np.ndarray:
        return derive_rng(cfg.seed, column).uniform(low, high, size=n)

    grade = derive_rng(cfg.seed, Columns.YIELD_STRENGTH).choice(_STEEL_GRADES, size=n)
    values[Columns.YIELD_STRENGTH] = np.clip(
        grade * uniform("R_eH_jitter", 0.95, 1.1), 235.0, 1125.0
    )
    values[Columns.TENSILE_STRENGTH] = np.clip(
        values[Columns.YIELD_STRENGTH] * uniform(Columns.TENSILE_STRENGTH, 1.1, 1.4),
        275.0,
        1420.0,
    )
    values[Columns.FREQUENCY] = uniform(Columns.FREQUENCY, 1.0, 32.0)
    values[Columns.FILLER_YIELD_STRENGTH] = uniform(
        Columns.FILLER_YIELD_STRENGTH, 350.0, 700.0
    )
    values[Columns.FILLER_TENSILE_STRENGTH] = np.clip(
        values[Columns.FILLER_YIELD_STRENGTH]
        * uniform(Columns.FILLER_TENSILE_STRENGTH, 1.1, 1.25),
        300.0,
        900.0,
    )
    values[Columns.BASE_PLATE_LENGTH] = uniform(Columns.BASE_PLATE_LENGTH, 200.0, 1000.0)
    values[Columns.BASE_PLATE_WIDTH] = uniform(Columns.BASE_PLATE_WIDTH, 40.0, 400.0)
    values[Columns.BASE_PLATE_THICKNESS] = uniform(Columns.BASE_PLATE_THICKNESS, 5.0, 40.0)
    values[Columns.STIFFENER_HEIGHT] = uniform(Columns.STIFFENER_HEIGHT, 20.0, 150.0)
    values[Columns.STIFFENER_LENGTH] = np.clip(
        values[Columns.BASE_PLATE_WIDTH] * uniform(Columns.STIFFENER_LENGTH, 0.3, 1.0),
        10.0,
        1000.0,
    )
    values[Columns.STIFFENER_THICKNESS] = uniform(Columns.STIFFENER_THICKNESS, 5.0, 30.0)
    values[Columns.WELD_THICKNESS] = uniform(Columns.WELD_THICKNESS, 3.0, 12.0)
    values[Columns.STRESS_RATIO] = uniform(Columns.STRESS_RATIO, -1.0, 0.8)
    values[Columns.STRESS_RANGE] = uniform(Columns.STRESS_RANGE, 80.0, 400.0)

    if cfg.planted_collinear:
        total = values[Columns.BASE_PLATE_WIDTH] + values[Columns.STIFFENER_LENGTH]
        noise = derive_rng(cfg.seed, Columns.PLANTED_COLLINEAR).normal(size=n)
        values[Columns.PLANTED_COLLINEAR] = total + 0.01 * total.std() * noise

    log_strength = planted_log10_strength(cfg=cfg, values=values)
    if cfg.noise_std_log10 > 0:
        log_strength = log_strength + derive_rng(cfg.seed, "noise").normal(
            0.0, cfg.noise_std_log10, size=n
        )
    strength = np.clip(10.0**log_strength, *_STRENGTH_CLIP)
    values[Columns.FATIGUE_STRENGTH] = strength
    values[Columns.CYCLES] = (
        REFERENCE_CYCLES * (strength / values[Columns.STRESS_RANGE]) ** BASQUIN_SLOPE
    )

    mask = {}
    for column, rate in sorted(cfg.missing_rates.items()):
        n_missing = int(round(rate * n))
        positions = derive_rng(cfg.seed, "missing", column).choice(
            n, size=n_missing, replace=False
        )
        mask[column] = np.zeros(n, dtype=bool)
        mask[column][positions] = True

    logger.info(f"Generated {n} synthetic rows with seed {cfg.seed}.")
    return Dataset.from_arrays(
        schema=schema, values={name: values[name] for name in schema.names}, mask=mask
    )


@typechecked
def planted_log10_strength(cfg: SynthConfig, values: dict[str, Any]) -> np.ndarray:
    """The noise-free decadic log of the planted fatigue strength.

    Args:
        cfg: Generator settings with the effect sizes.
        values: Column arrays holding at least the formula's regressors.

    Returns:
        log10(dsigma_c50) before noise and clipping.
    """
    tig = np.asarray(values[Columns.POST_TREAT]) == PostTreatment.TIG_DRESSING
    log_strength = (
        cfg.base
        + cfg.r_slope * np.asarray(values[Columns.STRESS_RATIO], dtype=float)
        + cfg.yield_slope * np.asarray(values[Columns.YIELD_STRENGTH], dtype=float) / 1000.0
        + cfg.tig_uplift * tig.astype(float)
        + cfg.thickness_slope
        * np.log10(np.asarray(values[Columns.BASE_PLATE_THICKNESS], dtype=float) / 25.0)
        + cfg.height_slope
        * (np.asarray(values[Columns.STIFFENER_HEIGHT], dtype=float) / 100.0 - 0.5)
    )
    if cfg.planted_ratio_feature:
        ratio = np.asarray(values[Columns.BASE_PLATE_WIDTH], dtype=float) / np.asarray(
            values[Columns.BASE_PLATE_THICKNESS], dtype=float
        )
        log_strength = log_strength + cfg.ratio_slope * (np.log10(ratio) - 1.0)
    return log_strength


@typechecked
def ground_truth(cfg: SynthConfig) -> dict[str, Any]:
    """The generative coefficients and settings, for run metadata."""
    coefficients = {
        "base": cfg.base,
        Columns.STRESS_RATIO: cfg.r_slope,
        f"{Columns.YIELD_STRENGTH}/1000": cfg.yield_slope,
        f"{Columns.POST_TREAT}={PostTreatment.TIG_DRESSING}": cfg.tig_uplift,
        f"log10({Columns.BASE_PLATE_THICKNESS}/25)": cfg.thickness_slope,
        f"{Columns.STIFFENER_HEIGHT}/100-0.5": cfg.height_slope,
    }
    if cfg.planted_ratio_feature:
        coefficients[
            f"log10({Columns.BASE_PLATE_WIDTH}/{Columns.BASE_PLATE_THICKNESS})-1"
        ] = cfg.ratio_slope
    # Effect spans over the drawn regressor ranges.
    spans = [
        (Columns.STRESS_RATIO, abs(cfg.r_slope) * 1.8),
        (Columns.YIELD_STRENGTH, abs(cfg.yield_slope) * 0.89),
        (Columns.POST_TREAT, abs(cfg.tig_uplift)),
    ]
    if cfg.planted_ratio_feature:
        spans.append((Columns.BASE_PLATE_WIDTH, abs(cfg.ratio_slope) * 1.9))
    dominant = max(spans, key=lambda item: item[1])[0]
    return {
        "config": asdict(cfg),
        "target": f"log10({Columns.FATIGUE_STRENGTH})",
        "coefficients": coefficients,
        "dominant_feature": dominant,
        "noise_std_log10": cfg.noise_std_log10,
        "cycles": (
            f"{REFERENCE_CYCLES:g} * ({Columns.FATIGUE_STRENGTH}/{Columns.STRESS_RANGE})"
            f"^{BASQUIN_SLOPE:g}"
        ),
    }


@typechecked
def write_synthetic(cfg: SynthConfig, output_dir: Path) -> Path:
    """Generate and write the synthetic CSV and its ground truth.

    Args:
        cfg: Generator settings.
        output_dir: Existing directory to write into.

    Returns:
        The path to the CSV.
    """
    ds = generate_synthetic(cfg)
    csv_path = output_dir / SynthFiles.DATA
    ds.to_frame().to_csv(csv_path, index=False, na_rep="", encoding="utf-8")
    dump_json(ground_truth(cfg), output_dir / SynthFiles.GROUND_TRUTH)
    logger.info(f"Wrote {csv_path}.")
    return csv_path

"""schema module."""

from fatigue_automl.lib.schema.schema import (  # noqa: F403
    Decisions,
    EdaStats,
    GoldenFeatures,
    Histogram,
    Leaderboard,
    LearningCurve,
    LinearCoefficients,
    MetricsTable,
    Missingness,
    ParityRows,
    PermutationImportance,
    ShapImportance,
    VifRounds,
    Violations,
)

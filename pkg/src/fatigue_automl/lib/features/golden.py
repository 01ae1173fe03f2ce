"""Golden features: pairwise differences and ratios scored by a shallow tree.

Every candidate is scored by fitting a depth-3 regression tree on that single feature
over one half of the rows and measuring its squared error on the other half. Lower
scores are better. Recipes are audited against the schema for physically meaningless
combinations, and flagged recipes stay out of the models.
"""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from itertools import combinations
from typing import Any

import numpy as np
import pandas as pd
import pandera.pandas as pa
from joblib import Parallel, delayed
from pandera.typing import DataFrame
from typeguard import typechecked

from fatigue_automl.lib.constants import (
    DIVIDE_GUARD,
    GOLDEN_FRACTION,
    GOLDEN_MAX_COUNT,
    GOLDEN_MIN_COUNT,
    GOLDEN_MIN_LEAF,
    GOLDEN_SCORE_FRACTION,
    GOLDEN_TREE_DEPTH,
    AuditPolicy,
    AuditReason,
    ColumnKind,
    GoldenOp,
    TableColumns,
)
from fatigue_automl.lib.learners.tree import grow_tree
from fatigue_automl.lib.schema import GoldenFeatures
from fatigue_automl.lib.schema.utils import schema_error_handler
from fatigue_automl.lib.tabular.feature_schema import ColumnSpec, FeatureSchema
from fatigue_automl.lib.utils import derive_rng

logger = logging.getLogger(__name__)

_SYMBOLS = {GoldenOp.SUBTRACT: "-", GoldenOp.DIVIDE: "/"}
_MIN_ROWS = 20


@dataclass(frozen=True)
class GoldenFeature:
    """A scored candidate: lhs - rhs or lhs / rhs."""

    lhs: str
    rhs: str
    op: GoldenOp
    score: float

    def __post_init__(self) -> None:
        """Validate the operands."""
        if self.lhs == self.rhs:
            raise ValueError(f"Golden feature operands must differ. Got {self.lhs!r} twice.")
        object.__setattr__(self, "op", GoldenOp(self.op))

    @property
    def recipe(self) -> str:
        """Readable construction, e.g. "w_BP / t_BP"."""
        return f"{self.lhs} {_SYMBOLS[self.op]} {self.rhs}"

    def to_dict(self) -> dict[str, Any]:
        """JSON-ready representation."""
        return {"lhs": self.lhs, "rhs": self.rhs, "op": str(self.op), "score": self.score}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "GoldenFeature":
        """Rebuild from `to_dict` output."""
        return cls(
            lhs=data["lhs"], rhs=data["rhs"], op=GoldenOp(data["op"]), score=data["score"]
        )


@dataclass(frozen=True)
class AuditFlag:
    """One reason a golden feature is excluded from modeling."""

    feature: GoldenFeature
    reason: AuditReason


@dataclass(frozen=True)
class GoldenDiscovery:
    """All candidates, best first, and how many of them are selected."""

    candidates: tuple[GoldenFeature, ...]
    n_selected: int

    @property
    def selected(self) -> tuple[GoldenFeature, ...]:
        """The top-ranked candidates."""
        return self.candidates[: self.n_selected]


@typechecked
def selected_count(n_features: int, n_candidates: int | None = None) -> int:
    """5% of the original feature count, rounded half up, clamped to [5, 50].

    Capped by the number of candidates when given.
    """
    count = min(
        GOLDEN_MAX_COUNT,
        max(GOLDEN_MIN_COUNT, int(math.floor(GOLDEN_FRACTION * n_features + 0.5))),
    )
    return count if n_candidates is None else min(count, n_candidates)


@typechecked
def apply_recipe(
    feature: GoldenFeature, X: np.ndarray, names: Sequence[str]
) -> np.ndarray:
    """Compute a golden feature column from an unstandardized matrix.

    Denominators are guarded as sign(d) * max(|d|, 1e-9), with sign(0) = +1.
    """
    names = list(names)
    lhs = np.asarray(X[:, names.index(feature.lhs)], dtype=np.float64)
    rhs = np.asarray(X[:, names.index(feature.rhs)], dtype=np.float64)
    if feature.op == GoldenOp.SUBTRACT:
        return lhs - rhs
    sign = np.where(rhs < 0, -1.0, 1.0)
    return lhs / (sign * np.maximum(np.abs(rhs), DIVIDE_GUARD))


@typechecked
def candidate_pairs(names: Sequence[str]) -> list[tuple[str, str, GoldenOp]]:
    """Every candidate recipe: one difference per pair, ratios in both orders.

    Differences take the operands in lexicographic order, so the candidate set does not
    depend on the column order.
    """
    candidates = []
    for first, second in combinations(sorted(names), 2):
        candidates.append((first, second, GoldenOp.SUBTRACT))
        candidates.append((first, second, GoldenOp.DIVIDE))
        candidates.append((second, first, GoldenOp.DIVIDE))
    return candidates


@typechecked
def score_candidate(
    values: np.ndarray, y: np.ndarray, fit_rows: np.ndarray, score_rows: np.ndarray
) -> float:
    """Squared error on the score rows of a depth-3 tree fitted on the fit rows."""
    column = np.ascontiguousarray(values[:, None], dtype=np.float64)
    tree = grow_tree(
        column[fit_rows],
        y[fit_rows],
        max_depth=GOLDEN_TREE_DEPTH,
        min_samples_leaf=GOLDEN_MIN_LEAF,
    )
    residual = tree.predict(column[score_rows]) - y[score_rows]
    return float(np.mean(residual**2))


@typechecked
def discover_golden(
    X: np.ndarray, y: np.ndarray, names: Sequence[str], seed: int, jobs: int = 1
) -> GoldenDiscovery:
    """Score every golden feature candidate and rank them.

    Args:
        X: n x d unstandardized features, n >= 20, d >= 2.
        y: n targets.
        names: The d feature names.
        seed: Seed of the fit/score split, shared by all candidates.
        jobs: Worker threads. Does not change the result.

    Returns:
        The candidates ranked by ascending score, ties by recipe, and the selected count.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    n, d = X.shape
    if d < 2:
        raise ValueError(f"discover_golden needs at least 2 features. Got {d}.")
    if n < _MIN_ROWS:
        raise ValueError(f"discover_golden needs at least {_MIN_ROWS} rows. Got {n}.")
    if len(names) != d:
        raise ValueError(f"{len(names)} names for {d} columns.")

    permutation = derive_rng(seed, "golden").permutation(n)
    n_score = int(round(GOLDEN_SCORE_FRACTION * n))
    score_rows = np.sort(permutation[:n_score])
    fit_rows = np.sort(permutation[n_score:])

    pairs = candidate_pairs(names)

    def score(lhs: str, rhs: str, op: GoldenOp) -> GoldenFeature:
        feature = GoldenFeature(lhs=lhs, rhs=rhs, op=op, score=0.0)
        values = apply_recipe(feature, X, names)
        return GoldenFeature(
            lhs=lhs, rhs=rhs, op=op, score=score_candidate(values, y, fit_rows, score_rows)
        )

    scored = Parallel(n_jobs=jobs, prefer="threads")(
        delayed(score)(lhs, rhs, op) for lhs, rhs, op in pairs
    )
    ranked = tuple(sorted(scored, key=lambda feature: (feature.score, feature.recipe)))
    n_selected = selected_count(d, len(ranked))
    logger.info(
        f"Scored {len(ranked)} golden feature candidates; selected {n_selected}. "
        f"Best: {ranked[0].recipe} (MSE {ranked[0].score:.4g})."
    )
    return GoldenDiscovery(candidates=ranked, n_selected=n_selected)


def _source_spec(name: str, schema: FeatureSchema) -> ColumnSpec:
    """The schema column behind an encoded feature name ("col" or "col=level")."""
    if name in schema:
        return schema.spec(name)
    column, sep, _ = name.partition("=")
    if sep and column in schema:
        return schema.spec(column)
    raise ValueError(f"Golden feature operand {name!r} is not a schema column.")


@typechecked
def audit_golden(
    features: Sequence[GoldenFeature],
    schema: FeatureSchema,
    policy: AuditPolicy | str = AuditPolicy.STRICT,
) -> list[AuditFlag]:
    """Flag physically meaningless recipes.

    - indicator_arithmetic: an operand is a binary or one-hot indicator.
    - mixed_kind: the operands' columns have different kinds.
    - unit_mismatch: real operands with different units. The strict policy flags
      differences and ratios, the lenient policy differences only.

    Returns:
        The flags, in feature order, then reason order.
    """
    policy = AuditPolicy(policy)
    flags = []
    for feature in features:
        lhs = _source_spec(feature.lhs, schema)
        rhs = _source_spec(feature.rhs, schema)
        reasons = []
        if ColumnKind.REAL != lhs.kind or ColumnKind.REAL != rhs.kind:
            reasons.append(AuditReason.INDICATOR_ARITHMETIC)
        if lhs.kind != rhs.kind:
            reasons.append(AuditReason.MIXED_KIND)
        if (
            lhs.kind == rhs.kind == ColumnKind.REAL
            and lhs.unit != rhs.unit
            and (policy == AuditPolicy.STRICT or feature.op == GoldenOp.SUBTRACT)
        ):
            reasons.append(AuditReason.UNIT_MISMATCH)
        flags.extend(AuditFlag(feature=feature, reason=reason) for reason in reasons)
    return flags


@typechecked
def included_features(
    discovery: GoldenDiscovery, flags: Sequence[AuditFlag]
) -> tuple[GoldenFeature, ...]:
    """Selected features without audit flags."""
    flagged = {flag.feature.recipe for flag in flags}
    return tuple(feature for feature in discovery.selected if feature.recipe not in flagged)


@schema_error_handler
@pa.check_types(lazy=True)
def golden_frame(
    discovery: GoldenDiscovery, flags: list[AuditFlag]
) -> DataFrame[GoldenFeatures]:
    """Every candidate with its rank, score, audit flags and inclusion."""
    reasons: dict[str, list[str]] = {}
    for flag in flags:
        reasons.setdefault(flag.feature.recipe, []).append(str(flag.reason))
    included = {feature.recipe for feature in included_features(discovery, flags)}
    selected = {feature.recipe for feature in discovery.selected}
    return pd.DataFrame(
        [
            {
                TableColumns.RANK: rank,
                TableColumns.RECIPE: feature.recipe,
                TableColumns.LHS: feature.lhs,
                TableColumns.RHS: feature.rhs,
                TableColumns.OP: str(feature.op),
                TableColumns.SCORE: feature.score,
                TableColumns.FLAGS: ";".join(reasons.get(feature.recipe, [])),
                TableColumns.SELECTED: feature.recipe in selected,
                TableColumns.INCLUDED: feature.recipe in included,
            }
            for rank, feature in enumerate(discovery.candidates, start=1)
        ]
    )


@dataclass(frozen=True)
class GoldenAugmenter:
    """Appends standardized golden feature columns, using training moments."""

    features: tuple[GoldenFeature, ...]
    mean: tuple[float, ...]
    std: tuple[float, ...]

    @property
    def names(self) -> list[str]:
        """Names of the appended columns: the recipes."""
        return [feature.recipe for feature in self.features]

    @classmethod
    def fit(
        cls, features: Sequence[GoldenFeature], X_raw: np.ndarray, names: Sequence[str]
    ) -> "GoldenAugmenter":
        """Record the training moments of each golden column."""
        columns = [apply_recipe(feature, X_raw, names) for feature in features]
        mean = [float(column.mean()) for column in columns]
        std = [float(column.std(ddof=1)) if len(column) > 1 else 1.0 for column in columns]
        return cls(
            features=tuple(features),
            mean=tuple(mean),
            std=tuple(value if value > 0 else 1.0 for value in std),
        )

    def transform(self, X_raw: np.ndarray, names: Sequence[str]) -> np.ndarray:
        """The n x k standardized golden columns of an unstandardized matrix."""
        if not self.features:
            return np.zeros((X_raw.shape[0], 0))
        columns = [
            (apply_recipe(feature, X_raw, names) - mean) / std
            for feature, mean, std in zip(self.features, self.mean, self.std)
        ]
        return np.column_stack(columns)

    def to_dict(self) -> dict[str, Any]:
        """JSON-ready representation."""
        return {
            "features": [feature.to_dict() for feature in self.features],
            "mean": list(self.mean),
            "std": list(self.std),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "GoldenAugmenter":
        """Rebuild from `to_dict` output."""
        return cls(
            features=tuple(GoldenFeature.from_dict(item) for item in data["features"]),
            mean=tuple(float(value) for value in data["mean"]),
            std=tuple(float(value) for value in data["std"]),
        )

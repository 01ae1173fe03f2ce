"""Greedy forward ensemble selection on out-of-fold predictions."""

import logging
import math
from collections import Counter
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
from typeguard import typechecked

from fatigue_automl.lib.automl.cv import TrialRecord
from fatigue_automl.lib.constants import DEFAULT_MAX_MEMBERS, MODEL_FORMAT_VERSION
from fatigue_automl.lib.errors import SchemaMismatch, WidthMismatch
from fatigue_automl.lib.learners.model import FittedModel, predict
from fatigue_automl.lib.utils import dump_json, load_json

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EnsembleDefinition:
    """Member trials with their weights, and the RMSE after each accepted pick."""

    members: tuple[int, ...]
    weights: tuple[float, ...]
    history: tuple[float, ...]

    @property
    def weight_by_trial(self) -> dict[int, float]:
        """Trial index to weight."""
        return dict(zip(self.members, self.weights))

    def to_dict(self) -> dict[str, Any]:
        """JSON-ready representation."""
        return {
            "members": list(self.members),
            "weights": list(self.weights),
            "history": list(self.history),
        }


def _rmse(predictions: np.ndarray, y: np.ndarray) -> float:
    return math.sqrt(float(np.mean((predictions - y) ** 2)))


@typechecked
def greedy_ensemble(
    trials: Sequence[TrialRecord], y: np.ndarray, max_members: int = DEFAULT_MAX_MEMBERS
) -> EnsembleDefinition:
    """Forward selection with replacement of the uniform average of out-of-fold vectors.

    Starts from the best single trial and adds, one pick at a time, the trial whose
    inclusion lowers the average's RMSE most. Stops when no pick strictly improves or
    `max_members` picks are made. Ties go to the earlier trial. Weights are pick counts
    over the total.

    Raises:
        ValueError: If no trial has out-of-fold predictions.
    """
    if max_members < 1:
        raise ValueError(f"max_members must be at least 1. Got {max_members}.")
    y = np.asarray(y, dtype=np.float64)
    pool = sorted(
        (record for record in trials if record.ok and record.oof is not None),
        key=lambda record: record.trial,
    )
    if not pool:
        raise ValueError("The ensemble needs at least one completed trial.")

    scores = [_rmse(record.oof, y) for record in pool]
    first = int(np.argmin(scores))
    picks = [first]
    total = pool[first].oof.copy()
    history = [scores[first]]
    while len(picks) < max_members:
        candidates = [_rmse((total + record.oof) / (len(picks) + 1), y) for record in pool]
        best = int(np.argmin(candidates))
        if not candidates[best] < history[-1]:
            break
        picks.append(best)
        total += pool[best].oof
        history.append(candidates[best])

    counts = Counter(picks)
    members = sorted(counts)
    logger.info(
        f"Ensemble of {len(picks)} picks over {len(members)} trials: "
        f"out-of-fold RMSE {history[0]:.5g} -> {history[-1]:.5g}."
    )
    return EnsembleDefinition(
        members=tuple(pool[index].trial for index in members),
        weights=tuple(counts[index] / len(picks) for index in members),
        history=tuple(history),
    )


@dataclass(frozen=True)
class EnsembleModel:
    """Weighted average of refitted members."""

    members: tuple[FittedModel, ...]
    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        """Validate members and weights."""
        if not self.members or len(self.members) != len(self.weights):
            raise ValueError("An ensemble needs one weight per member, and members.")
        if len({member.n_features for member in self.members}) != 1:
            raise ValueError("Ensemble members must share the feature width.")
        if min(self.weights) < 0 or not math.isclose(sum(self.weights), 1.0, abs_tol=1e-9):
            raise ValueError("Ensemble weights must be non-negative and sum to one.")

    @property
    def n_features(self) -> int:
        """Feature width of the members."""
        return self.members[0].n_features

    @property
    def feature_names(self) -> tuple[str, ...]:
        """Feature names of the members."""
        return self.members[0].feature_names

    def predict(self, X: np.ndarray) -> np.ndarray:
        """Weighted average of the member predictions.

        Raises:
            WidthMismatch: If X has another column count than the members.
        """
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise WidthMismatch(
                f"Ensemble expects {self.n_features} features. Got shape {X.shape}."
            )
        out = np.zeros(X.shape[0])
        for member, weight in zip(self.members, self.weights):
            out += weight * predict(member, X)
        return out

    def to_dict(self) -> dict[str, Any]:
        """JSON-ready representation."""
        return {
            "version": MODEL_FORMAT_VERSION,
            "members": [member.to_dict() for member in self.members],
            "weights": list(self.weights),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "EnsembleModel":
        """Rebuild from `to_dict` output."""
        if data.get("version") != MODEL_FORMAT_VERSION:
            raise SchemaMismatch(
                f"Unsupported ensemble format version {data.get('version')}."
            )
        return cls(
            members=tuple(FittedModel.from_dict(item) for item in data["members"]),
            weights=tuple(float(value) for value in data["weights"]),
        )


@typechecked
def save_ensemble(model: EnsembleModel, path: Path) -> Path:
    """Write an ensemble as versioned JSON."""
    return dump_json(model.to_dict(), path)


@typechecked
def load_ensemble(path: Path) -> EnsembleModel:
    """Read an ensemble written by `save_ensemble`."""
    return EnsembleModel.from_dict(load_json(path))

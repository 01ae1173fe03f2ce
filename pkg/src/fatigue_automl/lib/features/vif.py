"""Variance inflation factors and iterative VIF screening."""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
import pandas as pd
import pandera.pandas as pa
from pandera.typing import DataFrame
from typeguard import typechecked

from fatigue_automl.lib.constants import VIF_SINGULAR_TOL, TableColumns
from fatigue_automl.lib.errors import SingularDesign
from fatigue_automl.lib.schema import VifRounds
from fatigue_automl.lib.schema.utils import schema_error_handler

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class VifEntry:
    """VIF of one feature: 1 / (1 - R^2) of its auxiliary regression, or inf."""

    feature: str
    r_squared: float
    vif: float


@dataclass(frozen=True)
class VifScreen:
    """Outcome of iterative screening. `rounds` holds every computed VIF table."""

    kept: tuple[str, ...]
    dropped: tuple[str, ...]
    rounds: tuple[tuple[VifEntry, ...], ...]


@typechecked
def compute_vif(X: np.ndarray, names: Sequence[str]) -> list[VifEntry]:
    """VIF of every column of X.

    Each column is regressed, with an intercept, on all other columns. A perfect fit
    (R^2 >= 1 - 1e-12, or a constant column) gives an infinite VIF.

    Args:
        X: n x d reals with n > d.
        names: The d column names.

    Returns:
        One entry per column, sorted by descending VIF. Ties keep column order.
    """
    X = np.asarray(X, dtype=np.float64)
    n, d = X.shape
    if len(names) != d:
        raise ValueError(f"{len(names)} names for {d} columns.")
    if n <= d:
        raise ValueError(f"compute_vif needs more rows than columns. Got {n} x {d}.")

    entries = []
    for i in range(d):
        target = X[:, i]
        design = np.column_stack([np.ones(n), np.delete(X, i, axis=1)])
        solution, *_ = np.linalg.lstsq(design, target, rcond=None)
        ss_res = float(np.sum((target - design @ solution) ** 2))
        ss_tot = float(np.sum((target - target.mean()) ** 2))
        r_squared = 1.0 if ss_tot == 0.0 else min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
        if r_squared >= 1.0 - VIF_SINGULAR_TOL:
            logger.warning(
                str(SingularDesign(f"{names[i]} is a perfect fit of the others. VIF inf."))
            )
            vif = math.inf
        else:
            vif = 1.0 / (1.0 - r_squared)
        entries.append(VifEntry(feature=names[i], r_squared=r_squared, vif=vif))

    return sorted(entries, key=lambda entry: -entry.vif)


@typechecked
def vif_screen(X: np.ndarray, names: Sequence[str], threshold: float) -> VifScreen:
    """Drop the highest-VIF feature until every VIF is at most the threshold.

    Args:
        X: n x d reals with n > d.
        names: The d column names.
        threshold: VIF cap, > 1.

    Returns:
        The kept and dropped names (drop order) and the VIF table of every round.
    """
    if not threshold > 1:
        raise ValueError(f"threshold must be > 1. Got {threshold}.")
    X = np.asarray(X, dtype=np.float64)
    kept = list(names)
    dropped: list[str] = []
    rounds: list[tuple[VifEntry, ...]] = []
    while kept:
        columns = [list(names).index(name) for name in kept]
        entries = compute_vif(X[:, columns], kept)
        rounds.append(tuple(entries))
        worst = entries[0]
        if worst.vif <= threshold:
            break
        logger.info(
            f"VIF round {len(rounds)}: dropping {worst.feature} (VIF {worst.vif:.4g})."
        )
        kept.remove(worst.feature)
        dropped.append(worst.feature)

    return VifScreen(kept=tuple(kept), dropped=tuple(dropped), rounds=tuple(rounds))


@schema_error_handler
@pa.check_types(lazy=True)
def vif_rounds_frame(screen: VifScreen) -> DataFrame[VifRounds]:
    """Screening rounds in (round, feature, r_squared, vif) layout."""
    rows = [
        {
            TableColumns.ROUND: index,
            TableColumns.FEATURE: entry.feature,
            TableColumns.R_SQUARED: entry.r_squared,
            TableColumns.VIF: entry.vif,
        }
        for index, entries in enumerate(screen.rounds, start=1)
        for entry in entries
    ]
    return pd.DataFrame(
        rows,
        columns=[
            TableColumns.ROUND,
            TableColumns.FEATURE,
            TableColumns.R_SQUARED,
            TableColumns.VIF,
        ],
    )

"""Yeo-Johnson power transform: forward, inverse and maximum-likelihood lambda."""

import logging

import numpy as np
from scipy import optimize, stats
from typeguard import typechecked

from fatigue_automl.lib.constants import (
    YJ_LAMBDA_BOUNDS,
    YJ_LAMBDA_TOL,
    TransformDirection,
)
from fatigue_automl.lib.errors import DegenerateInput

logger = logging.getLogger(__name__)

# Lambdas this close to 0 or 2 use the logarithmic limit branches.
_LIMIT_TOL = np.spacing(1.0)
# Coarse scan step before the bounded refinement.
_SCAN_STEP = 0.25


@typechecked
def yj_transform(
    values: np.ndarray, lmbda: float, direction: TransformDirection | str
) -> np.ndarray:
    """Apply the Yeo-Johnson transform or its inverse.

    Args:
        values: Finite reals. For the inverse, values must lie in the transform's image;
            values outside it are clipped to the image boundary with a warning.
        lmbda: The transform parameter.
        direction: "forward" or "inverse".

    Returns:
        The transformed values, same shape as `values`.
    """
    values = np.asarray(values, dtype=float)
    if TransformDirection(direction) == TransformDirection.FORWARD:
        return stats.yeojohnson(values, lmbda=lmbda)
    return _yj_inverse(values, lmbda)


def _yj_inverse(y: np.ndarray, lmbda: float) -> np.ndarray:
    out = np.zeros_like(y)
    pos = y >= 0
    neg = ~pos
    # Smallest admissible log1p argument: the image boundary.
    floor = -1.0 + np.finfo(float).eps

    if abs(lmbda) < _LIMIT_TOL:
        out[pos] = np.expm1(y[pos])
    else:
        arg = lmbda * y[pos]
        _warn_if_clipped(arg < floor, lmbda)
        out[pos] = np.expm1(np.log1p(np.maximum(arg, floor)) / lmbda)

    if abs(lmbda - 2) < _LIMIT_TOL:
        out[neg] = -np.expm1(-y[neg])
    else:
        arg = -(2 - lmbda) * y[neg]
        _warn_if_clipped(arg < floor, lmbda)
        out[neg] = -np.expm1(np.log1p(np.maximum(arg, floor)) / (2 - lmbda))
    return out


def _warn_if_clipped(outside: np.ndarray, lmbda: float) -> None:
    if outside.any():
        logger.warning(
            f"{int(outside.sum())} values outside the Yeo-Johnson image for lambda "
            f"{lmbda:.6g}. Clipped to the image boundary."
        )


@typechecked
def yj_log_likelihood(values: np.ndarray, lmbda: float) -> float:
    """Profile log-likelihood of a Yeo-Johnson lambda under a normal model."""
    return float(stats.yeojohnson_llf(lmbda, np.asarray(values, dtype=float)))


@typechecked
def yj_fit_lambda(values: np.ndarray) -> float:
    """Maximum-likelihood Yeo-Johnson lambda on [-5, 5].

    Scans the bounds coarsely, then refines around the best scan point with a bounded
    Brent search (golden-section steps with parabolic interpolation) to a tolerance of
    1e-6 in lambda. A refined lambda that does not beat lambda = 1 is replaced by 1.

    Args:
        values: Finite reals, at least three, not all equal.

    Returns:
        The fitted lambda.

    Raises:
        DegenerateInput: If fewer than three values are given or all values are equal.
    """
    values = np.asarray(values, dtype=float)
    if not np.isfinite(values).all():
        raise ValueError("Yeo-Johnson lambda needs finite values.")
    if len(values) < 3:
        raise DegenerateInput(
            f"Yeo-Johnson lambda needs at least 3 values. Got {len(values)}."
        )
    if np.ptp(values) == 0:
        raise DegenerateInput("Yeo-Johnson lambda is undefined for constant values.")

    low, high = YJ_LAMBDA_BOUNDS
    grid = np.arange(low, high + _SCAN_STEP / 2, _SCAN_STEP)
    scanned = np.array([yj_log_likelihood(values, float(lmbda)) for lmbda in grid])
    scanned = np.where(np.isfinite(scanned), scanned, -np.inf)
    best = float(grid[int(np.argmax(scanned))])

    result = optimize.minimize_scalar(
        lambda lmbda: -yj_log_likelihood(values, float(lmbda)),
        bounds=(max(low, best - _SCAN_STEP), min(high, best + _SCAN_STEP)),
        method="bounded",
        options={"xatol": YJ_LAMBDA_TOL},
    )
    lmbda = float(result.x)
    if yj_log_likelihood(values, 1.0) >= yj_log_likelihood(values, lmbda):
        lmbda = 1.0
    return lmbda

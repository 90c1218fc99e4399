"""Algebraic identities between densities, the marginal contrast and the conditional density.

All functions operate on density values (floats or numpy arrays broadcasting together), never on
density functions. They are used by the estimator at prediction time and as exact oracles in tests.
"""
from typing import Union

import numpy as np
from pydantic import BaseModel, ConfigDict, NonNegativeFloat

from mcd_density.exceptions import ContrastDomainError

ArrayLike = Union[float, np.ndarray]


class DensityTriple(BaseModel):
    """Joint density value with the two marginal density values at the same point."""

    model_config = ConfigDict(frozen=True)

    p_xy: NonNegativeFloat
    p_x: NonNegativeFloat
    p_y: NonNegativeFloat


def check_ratio(ratio):
    """Validate a contrast ratio r, which must lie in the open interval (0, 1).

    Args:
        ratio (float): Fraction of matched pairs in a contrast dataset.

    Returns:
        float: The ratio.
    """
    ratio = float(ratio)
    if not 0.0 < ratio < 1.0:
        raise ContrastDomainError(f"ratio must be in the open interval (0, 1), got {ratio}")
    return ratio


def _as_values(value, name):
    values = np.asarray(value, dtype=float)
    if np.any(np.isnan(values)):
        raise ContrastDomainError(f"{name} contains NaN")
    return values


def _unwrap(values):
    return float(values) if np.ndim(values) == 0 else values


def marginal_contrast_values(p_xy: ArrayLike, p_x: ArrayLike, p_y: ArrayLike, ratio: float) -> ArrayLike:
    """Vectorized marginal contrast r.p_xy / (r.p_xy + (1 - r).p_x.p_y)."""
    ratio = check_ratio(ratio)
    p_xy = _as_values(p_xy, "p_xy")
    product = _as_values(p_x, "p_x") * _as_values(p_y, "p_y")
    if np.any(p_xy < 0) or np.any(product < 0):
        raise ContrastDomainError("density values must be nonnegative")
    numerator = ratio * p_xy
    denominator = numerator + (1.0 - ratio) * product
    if np.any(denominator <= 0):
        raise ContrastDomainError(
            f"marginal contrast undefined: r*p_xy + (1-r)*p_x*p_y is zero for p_xy={p_xy}, "
            f"p_x*p_y={product}, r={ratio}"
        )
    return _unwrap(numerator / denominator)


def marginal_contrast(density: DensityTriple, ratio: float) -> float:
    """Marginal contrast of a joint density value against the product of its marginals.

    Args:
        density (DensityTriple): p_xy, p_x and p_y evaluated at the same point (x, y).
        ratio (float): Contrast ratio r in (0, 1).

    Returns:
        float: q in [0, 1), strictly below 1 whenever p_x * p_y > 0.
    """
    return marginal_contrast_values(density.p_xy, density.p_x, density.p_y, ratio)


def conditional_from_contrast(p_y: ArrayLike, q: ArrayLike, ratio: float) -> ArrayLike:
    """Plug-in conditional density p_y * q / (1 - q) * (1 - r) / r.

    Args:
        p_y (float, np.ndarray): Marginal density value(s) of the target.
        q (float, np.ndarray): Contrast value(s), must be strictly below 1 (threshold first).
        ratio (float): Contrast ratio r in (0, 1).

    Returns:
        float or np.ndarray: Conditional density value(s).
    """
    ratio = check_ratio(ratio)
    p_y = _as_values(p_y, "p_y")
    q = _as_values(q, "q")
    if np.any(p_y < 0):
        raise ContrastDomainError("marginal density values must be nonnegative")
    if np.any(q < 0):
        raise ContrastDomainError(f"contrast must be nonnegative, got {q}")
    if np.any(q >= 1):
        raise ContrastDomainError(f"contrast must be strictly below 1, got {q}; apply thresholding first")
    return _unwrap(p_y * q / (1.0 - q) * (1.0 - ratio) / ratio)


def contrast_from_conditional(p_cond: ArrayLike, p_y: ArrayLike, ratio: float) -> ArrayLike:
    """Inverse of :func:`conditional_from_contrast`: r.p_cond / (r.p_cond + (1 - r).p_y).

    Args:
        p_cond (float, np.ndarray): Conditional density value(s), nonnegative.
        p_y (float, np.ndarray): Marginal density value(s), strictly positive.
        ratio (float): Contrast ratio r in (0, 1).

    Returns:
        float or np.ndarray: Contrast value(s) in [0, 1).
    """
    ratio = check_ratio(ratio)
    p_cond = _as_values(p_cond, "p_cond")
    p_y = _as_values(p_y, "p_y")
    if np.any(p_y <= 0):
        raise ContrastDomainError(f"marginal density must be strictly positive, got {p_y}")
    if np.any(p_cond < 0):
        raise ContrastDomainError(f"conditional density must be nonnegative, got {p_cond}")
    numerator = ratio * p_cond
    return _unwrap(numerator / (numerator + (1.0 - ratio) * p_y))

"""Evaluation functionals for estimated conditional densities."""
import numpy as np
from scipy.integrate import trapezoid

from mcd_density.exceptions import MetricShapeError

DELTA = 1e-6


def _check_delta(delta):
    if not delta > 0:
        raise MetricShapeError(f"delta must be positive, got {delta}")


def _paired(true_pdfs, pred_pdfs):
    true_values = np.atleast_1d(np.asarray(true_pdfs, dtype=float))
    pred_values = np.atleast_1d(np.asarray(pred_pdfs, dtype=float))
    if true_values.shape != pred_values.shape:
        raise MetricShapeError(f"true densities have shape {true_values.shape}, predictions {pred_values.shape}")
    return true_values, pred_values


def empirical_kl(true_pdfs, pred_pdfs, delta=DELTA, normalize=False):
    """Sum over test points and grid values of f * ln(f / g), with f and g clamped below at ``delta``.

    The sum is not weighted by the grid spacing. With ``normalize`` the result is divided by the
    number of test points (rows).

    Args:
        true_pdfs (array-like): True densities f, one row per test point, one column per grid value.
        pred_pdfs (array-like): Predicted densities g, same shape.
        delta (float): Clamp applied to both f and g.
        normalize (bool): Divide by the number of test points.

    Returns:
        float: The divergence.
    """
    _check_delta(delta)
    true_values, pred_values = _paired(true_pdfs, pred_pdfs)
    true_values = np.maximum(true_values, delta)
    pred_values = np.maximum(pred_values, delta)
    total = float(np.sum(true_values * np.log(true_values / pred_values)))
    if normalize:
        rows = true_values.shape[0] if true_values.ndim > 1 else 1
        total /= rows
    return total


def empirical_nll(pred_at_true_targets, delta=DELTA):
    """Negative log-likelihood -sum(ln(max(g, delta))) of predicted densities at the observed targets."""
    _check_delta(delta)
    values = np.maximum(np.asarray(pred_at_true_targets, dtype=float).ravel(), delta)
    return float(-np.sum(np.log(values)))


def weighted_kl(true_pdfs, pred_pdfs, grid, delta=DELTA):
    """Trapezoid-weighted KL divergence per test point, averaged over test points.

    Sanity-check variant of :func:`empirical_kl`; benchmark tables never use it.
    """
    _check_delta(delta)
    true_values, pred_values = _paired(true_pdfs, pred_pdfs)
    true_values = np.atleast_2d(np.maximum(true_values, delta))
    pred_values = np.atleast_2d(np.maximum(pred_values, delta))
    grid = np.asarray(grid, dtype=float).ravel()
    if grid.size != true_values.shape[1]:
        raise MetricShapeError(f"grid has {grid.size} points, densities have {true_values.shape[1]} columns")
    per_point = trapezoid(true_values * np.log(true_values / pred_values), grid, axis=1)
    return float(np.mean(per_point))

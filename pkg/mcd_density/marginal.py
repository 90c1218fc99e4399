"""Univariate Gaussian kernel density estimator for the marginal density of the target."""
# pylint: disable=no-self-argument
import math
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, PositiveFloat, field_validator
from scipy import optimize, stats

from mcd_density.exceptions import DatasetError

NORMAL_REFERENCE = 1.06


def normal_reference_bandwidth(values):
    """Bandwidth 1.06 * std * n^(-1/5), with a small fallback for constant or single samples."""
    values = np.asarray(values, dtype=float)
    sigma = float(np.std(values, ddof=1)) if values.size > 1 else 0.0
    if not sigma > 0:
        return 1e-3 * max(1.0, abs(float(values[0])))
    return NORMAL_REFERENCE * sigma * values.size ** (-0.2)


class MarginalDensityModel(BaseModel):
    """Fitted Gaussian KDE: a mixture of equally weighted normal kernels centred on the samples."""

    model_config = ConfigDict(frozen=True)

    samples: List[float]
    bandwidth: PositiveFloat

    @field_validator("samples")
    def samples_sorted_and_finite(cls, samples):
        """Keep samples sorted and reject empty or non finite input."""
        if not samples:
            raise ValueError("a kernel density estimate needs at least one sample")
        if not all(math.isfinite(value) for value in samples):
            raise ValueError("samples must be finite")
        return sorted(samples)

    @property
    def sample_count(self):
        """Number of kernels."""
        return len(self.samples)

    @property
    def centers(self):
        """Kernel centres as a numpy array."""
        return np.asarray(self.samples)

    def pdf(self, y):
        """Evaluate the density at ``y`` (scalar or array)."""
        points = np.asarray(y, dtype=float)
        values = stats.norm.pdf((points[..., None] - self.centers) / self.bandwidth).mean(axis=-1) / self.bandwidth
        return float(values) if values.ndim == 0 else values

    def cdf(self, y):
        """Average of the kernel normal CDFs at ``y``."""
        points = np.asarray(y, dtype=float)
        values = stats.norm.cdf((points[..., None] - self.centers) / self.bandwidth).mean(axis=-1)
        return float(values) if values.ndim == 0 else values

    def quantile(self, prob):
        """Solve CDF(y) = prob by bisection.

        The root is bracketed by the extreme samples shifted by the kernel quantile, since the
        mixture CDF lies between the CDFs of its first and last kernels.
        """
        prob = float(prob)
        if not 0.0 < prob < 1.0:
            raise DatasetError(f"quantile level must be in the open interval (0, 1), got {prob}")
        shift = self.bandwidth * stats.norm.ppf(prob)
        lower, upper = self.samples[0] + shift, self.samples[-1] + shift
        if lower == upper:
            return lower
        tolerance = 1e-12 * (self.samples[-1] - self.samples[0] + self.bandwidth)
        return optimize.bisect(lambda value: self.cdf(value) - prob, lower, upper, xtol=tolerance, maxiter=500)


def fit_kde(y, bandwidth: Optional[float] = None) -> MarginalDensityModel:
    """Fit a Gaussian KDE with the normal reference bandwidth.

    Args:
        y (array-like): Target values, at least one, all finite.
        bandwidth (float, optional): Fixed bandwidth overriding the normal reference rule.

    Returns:
        MarginalDensityModel: The fitted model.
    """
    values = np.asarray(y, dtype=float).ravel()
    if values.size == 0:
        raise DatasetError("cannot fit a kernel density estimate on an empty sample")
    if not np.all(np.isfinite(values)):
        raise DatasetError("cannot fit a kernel density estimate on non finite values")
    if bandwidth is None:
        bandwidth = normal_reference_bandwidth(values)
    return MarginalDensityModel(samples=values.tolist(), bandwidth=bandwidth)


def kde_pdf(model: MarginalDensityModel, y):
    """Density of the fitted KDE at ``y``."""
    return model.pdf(y)


def kde_quantile(model: MarginalDensityModel, prob):
    """Quantile of the fitted KDE at level ``prob`` in (0, 1)."""
    return model.quantile(prob)

"""Synthetic conditional density models with exact ground-truth densities.

Every model draws X ~ N(0, I_p) and Y from a location family whose location depends on x through a
single statistic (x.beta, or the scaled sum of the features), so conditional densities on a grid
are evaluated with one broadcast per model.
"""
from typing import Dict, Sequence, Type

import numpy as np
from scipy import stats

from mcd_density.contrast import marginal_contrast_values
from mcd_density.datasets import MultiTargetDataset, SupervisedDataset
from mcd_density.exceptions import DatasetError, UnknownDensityModel

DENSITY_MODELS: Dict[str, Type["DensityModel"]] = {}


def register_density_model(cls):
    """Class decorator adding a density model to the registry under its ``key``."""
    DENSITY_MODELS[cls.key] = cls
    return cls


def _features(X, width):
    features = np.asarray(X, dtype=float)
    if features.ndim == 1:
        features = features.reshape(1, -1)
    if features.shape[1] != width:
        raise DatasetError(f"expected {width} features, got {features.shape[1]}")
    return features


class DensityModel:
    """Base class for density models.

    Subclasses implement ``statistic`` (per-row summary of x), ``density`` (pdf of y given the
    statistic, broadcasting) and ``draw`` (targets given the statistic).
    """

    key = ""
    name = ""

    def __init__(self, feature_dim: int = 1, seed: int = 0):
        """Create a model on ``feature_dim`` features; ``seed`` fixes any coefficient drawn at creation."""
        if int(feature_dim) < 1:
            raise DatasetError(f"feature dimension must be at least 1, got {feature_dim}")
        self.feature_dim = int(feature_dim)
        self.seed = int(seed)

    def statistic(self, X) -> np.ndarray:
        """Per-row summary of the features that drives the conditional law."""
        raise NotImplementedError

    def density(self, stat, y) -> np.ndarray:
        """Conditional density of y given the statistic (broadcasting)."""
        raise NotImplementedError

    def draw(self, stat, rng) -> np.ndarray:
        """One target per statistic value."""
        raise NotImplementedError

    def location(self, X) -> np.ndarray:
        """Centre of the conditional law, per row."""
        return self.statistic(X)

    def spread(self, X) -> np.ndarray:
        """Scale of the conditional law, per row; 8 spreads around the location hold its mass."""
        raise NotImplementedError

    def sample_features(self, n, rng):
        """Draw n observations from N(0, I_p)."""
        return rng.standard_normal((int(n), self.feature_dim))

    def sample_targets(self, X, rng):
        """Draw one target per row of X."""
        return self.draw(self.statistic(X), rng)

    def sample(self, n, rng) -> SupervisedDataset:
        """Draw n (x, y) pairs."""
        X = self.sample_features(n, rng)
        return SupervisedDataset(X=X, Y=self.sample_targets(X, rng))

    def sample_multi(self, n, m, rng) -> MultiTargetDataset:
        """Draw n observations with m conditionally independent targets each."""
        X = self.sample_features(n, rng)
        stat = self.statistic(X)
        return MultiTargetDataset(X=X, Y=np.column_stack([self.draw(stat, rng) for _ in range(int(m))]))

    def pdf(self, X, y):
        """Conditional density of y[i] given X[i]."""
        return self.density(self.statistic(X), np.asarray(y, dtype=float).ravel())

    def conditional_pdf(self, x, grid):
        """Conditional density of every grid value given one observation x."""
        return self.conditional_pdf_matrix(x, grid)[0]

    def conditional_pdf_matrix(self, X, grid):
        """Matrix of conditional densities, one row per observation, one column per grid value."""
        return self.density(self.statistic(X)[:, None], np.asarray(grid, dtype=float)[None, :])


class _LinearModel(DensityModel):
    """Shared pieces of the models driven by x.beta with beta ~ U(0, 1) frozen at creation."""

    def __init__(self, feature_dim: int = 1, seed: int = 0, sigma: float = 0.3):
        super().__init__(feature_dim, seed)
        if sigma <= 0:
            raise DatasetError(f"sigma must be positive, got {sigma}")
        self.sigma = float(sigma)
        self.beta = np.random.default_rng(self.seed).uniform(0.0, 1.0, self.feature_dim)

    def statistic(self, X):
        return _features(X, self.feature_dim) @ self.beta

    def spread(self, X):
        return np.full(_features(X, self.feature_dim).shape[0], self.sigma)


@register_density_model
class BasicLinear(_LinearModel):
    """Y = x.beta + sigma * N(0, 1)."""

    key = "basic_linear"
    name = "BasicLinear"

    def density(self, stat, y):
        return stats.norm.pdf(y, loc=stat, scale=self.sigma)

    def draw(self, stat, rng):
        return stat + self.sigma * rng.standard_normal(np.shape(stat))


@register_density_model
class AsymmetricLinear(_LinearModel):
    """Y = x.beta + sigma * |N(0, 1)|, a half-normal supported above x.beta."""

    key = "asymmetric_linear"
    name = "AsymmetricLinear"

    def density(self, stat, y):
        return stats.halfnorm.pdf(y, loc=stat, scale=self.sigma)

    def draw(self, stat, rng):
        return stat + self.sigma * np.abs(rng.standard_normal(np.shape(stat)))


def _scaled_sum(X, width):
    return _features(X, width).sum(axis=1) / np.sqrt(width)


@register_density_model
class LinearGaussSub(DensityModel):
    """Y = a + b * sum(x) / sqrt(p) + sigma * N(0, 1); the marginal of Y is N(a, b^2 + sigma^2)."""

    key = "linear_gauss"
    name = "LinearGaussSub"

    def __init__(self, feature_dim: int = 1, seed: int = 0, a: float = 0.0, b: float = 1.0, sigma: float = 0.5):
        super().__init__(feature_dim, seed)
        if sigma <= 0:
            raise DatasetError(f"sigma must be positive, got {sigma}")
        self.a, self.b, self.sigma = float(a), float(b), float(sigma)

    def statistic(self, X):
        return self.a + self.b * _scaled_sum(X, self.feature_dim)

    def density(self, stat, y):
        return stats.norm.pdf(y, loc=stat, scale=self.sigma)

    def draw(self, stat, rng):
        return stat + self.sigma * rng.standard_normal(np.shape(stat))

    def spread(self, X):
        return np.full(_features(X, self.feature_dim).shape[0], self.sigma)

    def marginal_pdf(self, y):
        """Exact marginal density of Y."""
        return stats.norm.pdf(y, loc=self.a, scale=np.sqrt(self.b**2 + self.sigma**2))


@register_density_model
class LinearStudentSub(DensityModel):
    """Y = x.beta / sqrt(p) + scale * T(dof), beta ~ U(0, 1) frozen at creation."""

    key = "linear_student"
    name = "LinearStudentSub"

    def __init__(self, feature_dim: int = 1, seed: int = 0, dof: float = 5.0, scale: float = 0.5):
        super().__init__(feature_dim, seed)
        if dof <= 1:
            raise DatasetError(f"degrees of freedom must be above 1, got {dof}")
        if scale <= 0:
            raise DatasetError(f"scale must be positive, got {scale}")
        self.dof, self.scale = float(dof), float(scale)
        self.beta = np.random.default_rng(self.seed).uniform(0.0, 1.0, self.feature_dim)

    def statistic(self, X):
        return _features(X, self.feature_dim) @ self.beta / np.sqrt(self.feature_dim)

    def density(self, stat, y):
        return stats.t.pdf(y, self.dof, loc=stat, scale=self.scale)

    def draw(self, stat, rng):
        return stat + self.scale * rng.standard_t(self.dof, size=np.shape(stat))

    def spread(self, X):
        # at least the standard deviation, and wide enough for 8 spreads to hold 99.98% of the mass
        width = stats.t.ppf(1.0 - 1e-4, self.dof) / 8.0
        if self.dof > 2:
            width = max(width, np.sqrt(self.dof / (self.dof - 2.0)))
        return np.full(_features(X, self.feature_dim).shape[0], self.scale * width)


@register_density_model
class GaussianMixtSub(DensityModel):
    """Gaussian mixture whose component means all shift by sum(x) / sqrt(p)."""

    key = "gaussian_mixt"
    name = "GaussianMixtSub"

    def __init__(
        self,
        feature_dim: int = 1,
        seed: int = 0,
        weights: Sequence[float] = (0.5, 0.5),
        means: Sequence[float] = (-1.5, 1.5),
        scales: Sequence[float] = (0.5, 0.5),
    ):
        super().__init__(feature_dim, seed)
        self.weights = np.asarray(weights, dtype=float)
        self.means = np.asarray(means, dtype=float)
        self.scales = np.asarray(scales, dtype=float)
        if not self.weights.shape == self.means.shape == self.scales.shape or self.weights.ndim != 1:
            raise DatasetError("weights, means and scales must have the same length")
        if np.any(self.weights < 0) or not np.isclose(self.weights.sum(), 1.0, rtol=0.0, atol=1e-9):
            raise DatasetError(f"mixture weights must be nonnegative and sum to 1, got {self.weights.tolist()}")
        if np.any(self.scales <= 0):
            raise DatasetError("mixture scales must be positive")

    def statistic(self, X):
        return _scaled_sum(X, self.feature_dim)

    def density(self, stat, y):
        stat, y = np.broadcast_arrays(np.asarray(stat, dtype=float), np.asarray(y, dtype=float))
        total = np.zeros(stat.shape)
        for weight, mean, scale in zip(self.weights, self.means, self.scales):
            total += weight * stats.norm.pdf(y, loc=stat + mean, scale=scale)
        return total

    def draw(self, stat, rng):
        stat = np.asarray(stat, dtype=float)
        component = rng.choice(len(self.weights), size=stat.shape, p=self.weights)
        return stat + self.means[component] + self.scales[component] * rng.standard_normal(stat.shape)

    def location(self, X):
        return self.statistic(X) + float(self.weights @ self.means)

    def spread(self, X):
        mean = float(self.weights @ self.means)
        variance = float(self.weights @ (self.scales**2 + self.means**2)) - mean**2
        return np.full(_features(X, self.feature_dim).shape[0], np.sqrt(variance))


@register_density_model
class BivariateGaussOracle(DensityModel):
    """Standard bivariate normal (X, Y) with correlation rho, the contrast being known in closed form."""

    key = "bivariate_gauss"
    name = "BivariateGauss"

    def __init__(self, feature_dim: int = 1, seed: int = 0, rho: float = 0.8):
        super().__init__(1, seed)
        if feature_dim != 1:
            raise DatasetError("the bivariate Gaussian model has exactly one feature")
        if not -1.0 < rho < 1.0:
            raise DatasetError(f"correlation must be in (-1, 1), got {rho}")
        self.rho = float(rho)
        self.sigma = float(np.sqrt(1.0 - rho**2))

    def statistic(self, X):
        return self.rho * _features(X, 1)[:, 0]

    def density(self, stat, y):
        return stats.norm.pdf(y, loc=stat, scale=self.sigma)

    def draw(self, stat, rng):
        return stat + self.sigma * rng.standard_normal(np.shape(stat))

    def spread(self, X):
        return np.full(_features(X, 1).shape[0], self.sigma)

    def marginal_pdf(self, y):
        """Density of Y (standard normal)."""
        return stats.norm.pdf(y)

    def joint_pdf(self, x, y):
        """Joint density of (X, Y) at paired points."""
        points = np.column_stack([np.ravel(x), np.ravel(y)])
        covariance = [[1.0, self.rho], [self.rho, 1.0]]
        return np.atleast_1d(stats.multivariate_normal.pdf(points, mean=[0.0, 0.0], cov=covariance))

    def contrast(self, x, y, ratio):
        """Exact contrast r p(x, y) / (r p(x, y) + (1 - r) p(x) p(y)) at paired points."""
        return marginal_contrast_values(self.joint_pdf(x, y), stats.norm.pdf(np.ravel(x)), self.marginal_pdf(np.ravel(y)), ratio)


def get_density_model(name, **params) -> DensityModel:
    """Instantiate a registered density model by key or display name.

    Args:
        name (str): Registry key (e.g. ``basic_linear``) or display name (e.g. ``BasicLinear``).
        params: Model parameters such as ``feature_dim``, ``seed`` or ``sigma``.

    Returns:
        DensityModel: The model.
    """
    for key, cls in DENSITY_MODELS.items():
        if name in (key, cls.name):
            return cls(**params)
    raise UnknownDensityModel(name, sorted(DENSITY_MODELS))


def basic_linear(p, sigma=0.3, seed=0):
    """Linear model with Gaussian noise."""
    return BasicLinear(feature_dim=p, seed=seed, sigma=sigma)


def asymmetric_linear(p, sigma=0.3, seed=0):
    """Linear model with half-normal noise."""
    return AsymmetricLinear(feature_dim=p, seed=seed, sigma=sigma)


def linear_gauss_sub(p, a=0.0, b=1.0, sigma=0.5, seed=0):
    """Gaussian location model on the scaled feature sum."""
    return LinearGaussSub(feature_dim=p, seed=seed, a=a, b=b, sigma=sigma)


def linear_student_sub(p, dof=5.0, scale=0.5, seed=0):
    """Student-t location model."""
    return LinearStudentSub(feature_dim=p, seed=seed, dof=dof, scale=scale)


def gaussian_mixt_sub(p, weights=(0.5, 0.5), means=(-1.5, 1.5), scales=(0.5, 0.5), seed=0):
    """Two-component Gaussian mixture with shifting component means."""
    return GaussianMixtSub(feature_dim=p, seed=seed, weights=weights, means=means, scales=scales)


def bivariate_gauss_oracle(rho, seed=0):
    """Standard bivariate normal with correlation rho."""
    return BivariateGaussOracle(seed=seed, rho=rho)

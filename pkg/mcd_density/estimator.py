"""Conditional density estimators: the contrastive plug-in estimator and the marginal baseline.

The contrastive estimator learns q(x, y), the probability that a (x, y) pair is matched rather than
drawn from the product of marginals, and turns it into a conditional density with

    p(y | x) = p_Y(y) * q / (1 - q) * (1 - r) / r

where p_Y is a kernel density estimate of the target and r the fraction of matched pairs.
"""
# pylint: disable=no-self-argument
from abc import ABC, abstractmethod
from typing import Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PositiveInt, field_validator
from scipy.integrate import trapezoid

from mcd_density import constructions
from mcd_density.contrast import check_ratio, conditional_from_contrast
from mcd_density.datasets import MarginalDatasets, MultiTargetDataset, SupervisedDataset
from mcd_density.discriminators import BaseDiscriminator, DiscriminatorSpec, build_discriminator
from mcd_density.exceptions import (
    DatasetError,
    DegenerateDensity,
    IncompatibleConstruction,
    ModelFileError,
)
from mcd_density.marginal import MarginalDensityModel, fit_kde
from mcd_density.utils import dump_data_to_yaml, load_file, substream

GRID_QUANTILES = (0.001, 0.999)


class McdConfig(BaseModel):
    """Settings of one contrastive estimator fit."""

    model_config = ConfigDict(extra="forbid")

    ratio: float = 0.05
    construction: Literal["iid", "id", "iid_additional", "id_additional", "id_multitarget"] = "id"
    discriminator: DiscriminatorSpec = Field(default_factory=DiscriminatorSpec)
    epsilon: float = Field(1e-6, gt=0.0, lt=0.5)
    seed: int = 0
    n_joint: Optional[PositiveInt] = None
    n_marg: Optional[PositiveInt] = None

    @field_validator("ratio")
    def ratio_in_open_unit_interval(cls, ratio):
        """Validate 0 < ratio < 1."""
        return check_ratio(ratio)


class ConditionalEstimator(ABC):
    """Common interface of conditional density estimators.

    Hyper-parameters are given at construction, ``fit`` learns from (X, Y), ``pdf`` evaluates the
    density at paired (x, y) and ``pdf_from_X`` evaluates it on a shared grid of targets.
    """

    name = ""

    @abstractmethod
    def fit(self, X, Y, extra_x=None, extra_y=None):
        """Fit on features X and targets Y, optionally with additional marginal samples."""

    @abstractmethod
    def pdf(self, X, y) -> np.ndarray:
        """Density of y[i] given X[i] for every i."""

    @abstractmethod
    def pdf_from_X(self, X, grid) -> np.ndarray:
        """Matrix of densities, one row per row of X, one column per grid value."""


def check_grid(grid):
    """Validate a prediction grid: strictly increasing with at least 2 points."""
    grid = np.asarray(grid, dtype=float).ravel()
    if grid.size < 2:
        raise DatasetError(f"a grid needs at least 2 points, got {grid.size}")
    if np.any(np.diff(grid) <= 0):
        raise DatasetError("grid must be strictly increasing")
    return grid


def rescale(pdf_values, grid):
    """Divide density values by their trapezoidal integral over ``grid``.

    Args:
        pdf_values (array-like): One row of values per density, the last axis matching ``grid``.
        grid (array-like): Strictly increasing target values.

    Returns:
        numpy.ndarray: Values whose trapezoidal integral is 1.
    """
    grid = check_grid(grid)
    values = np.asarray(pdf_values, dtype=float)
    if values.shape[-1] != grid.size:
        raise DatasetError(f"{values.shape[-1]} density values for a grid of {grid.size} points")
    if np.any(values < 0):
        raise DatasetError("density values must be nonnegative")
    integral = np.asarray(trapezoid(values, grid, axis=-1))
    if np.any(integral <= 0) or not np.all(np.isfinite(integral)):
        raise DegenerateDensity("degenerate density: trapezoidal integral is not positive")
    return values / integral[..., None]


def _as_features(X):
    features = np.asarray(X, dtype=float)
    return features.reshape(1, -1) if features.ndim == 1 else features


def _extra_datasets(extra_x, extra_y):
    if extra_x is None and extra_y is None:
        return None
    return MarginalDatasets(extra_x=extra_x, extra_y=extra_y)


class McdEstimator(ConditionalEstimator):
    """Marginal contrastive discrimination estimator."""

    def __init__(self, config: Optional[McdConfig] = None):
        """Create an unfitted estimator.

        Args:
            config (McdConfig, optional): Ratio, construction, discriminator and thresholding settings.
        """
        self.config = config if config is not None else McdConfig()
        self.marginal: Optional[MarginalDensityModel] = None
        self.discriminator: Optional[BaseDiscriminator] = None
        self.ratio: Optional[float] = None
        self.contrast_size: Optional[int] = None
        self.metadata: dict = {}

    @classmethod
    def from_parts(cls, marginal, discriminator, ratio, epsilon=1e-6, construction="id"):
        """Assemble a fitted estimator from a marginal model and a fitted discriminator."""
        estimator = cls(McdConfig(ratio=ratio, epsilon=epsilon, construction=construction))
        estimator.marginal = marginal
        estimator.discriminator = discriminator
        estimator.ratio = check_ratio(ratio)
        return estimator

    @property
    def name(self):
        """Method name, e.g. MCD:MLP."""
        return f"MCD:{self.config.discriminator.label}"

    @property
    def epsilon(self):
        """Thresholding constant."""
        return self.config.epsilon

    @property
    def construction(self):
        """Name of the contrast dataset construction."""
        return self.config.construction

    def _require_fitted(self):
        if self.marginal is None or self.discriminator is None:
            raise DatasetError("estimator is not fitted")

    def _counts(self, available_joint, cap_marg):
        n_joint = self.config.n_joint or available_joint
        if self.config.n_marg:
            return n_joint, self.config.n_marg
        return constructions.ratio_to_counts(n_joint, self.config.ratio, cap_marg)

    def build_contrast(self, dataset, extra: Optional[MarginalDatasets], rng):
        """Dispatch to the construction named in the config."""
        cfg = self.config
        name = cfg.construction
        if name == "id_multitarget":
            if not isinstance(dataset, MultiTargetDataset):
                raise IncompatibleConstruction("id_multitarget requires a multi-target dataset")
            n, m = dataset.n, dataset.m
            n_joint, n_marg = self._counts(n * m, constructions.mismatched_pool_size(n, m=m))
            return constructions.build_id_multitarget(dataset, n_joint, n_marg, rng)
        if isinstance(dataset, MultiTargetDataset):
            raise IncompatibleConstruction(f"{name} construction cannot use a multi-target dataset")
        if name.endswith("_additional"):
            if extra is None:
                raise IncompatibleConstruction(f"{name} construction requires additional marginal data")
        elif extra is not None and (extra.n_x or extra.n_y):
            raise IncompatibleConstruction(f"{name} construction cannot use additional marginal data")
        extra = extra if extra is not None else MarginalDatasets()
        if name == "iid":
            return constructions.build_iid(dataset, cfg.ratio, rng)
        if name == "iid_additional":
            return constructions.build_iid_additional(dataset, extra, cfg.ratio, rng)
        n_joint, n_marg = self._counts(dataset.n, constructions.mismatched_pool_size(dataset.n, extra.n_x, extra.n_y))
        return constructions.build_id_additional(dataset, extra, n_joint, n_marg, rng)

    def fit_dataset(self, dataset: Union[SupervisedDataset, MultiTargetDataset], extra=None):
        """Fit the marginal model, build the contrast dataset and fit the discriminator.

        The target KDE uses every target value available, additional targets included. The plug-in
        ratio is the Bernoulli parameter for i.i.d. constructions and the realized fraction of
        matched samples for the other constructions.

        Args:
            dataset (SupervisedDataset, MultiTargetDataset): Training data.
            extra (MarginalDatasets, optional): Additional observations and targets.

        Returns:
            McdEstimator: self, fitted.
        """
        if isinstance(dataset, SupervisedDataset) and dataset.k != 1:
            raise DatasetError(f"only univariate targets are supported, got {dataset.k} target columns")
        targets = dataset.target_values()
        if extra is not None and extra.n_y:
            targets = np.concatenate([targets, extra.extra_y.ravel()])
        self.marginal = fit_kde(targets)

        contrast = self.build_contrast(dataset, extra, substream(self.config.seed, 0))
        self.contrast_size = contrast.size
        if self.config.construction in constructions.IID_CONSTRUCTIONS:
            self.ratio = self.config.ratio
        else:
            self.ratio = contrast.ratio

        spec = self.config.discriminator.model_copy(
            update={"seed": int(substream(self.config.seed, 1).integers(2**31))}
        )
        self.discriminator = build_discriminator(spec).fit(contrast)
        return self

    def fit(self, X, Y, extra_x=None, extra_y=None):
        """Fit from arrays; Y holds one column, or m columns for the multi-target construction."""
        if self.config.construction == "id_multitarget":
            dataset = MultiTargetDataset(X=X, Y=Y)
        else:
            dataset = SupervisedDataset(X=X, Y=Y)
        return self.fit_dataset(dataset, _extra_datasets(extra_x, extra_y))

    def contrast(self, X, y):
        """Thresholded contrast min(q, 1 - epsilon) at paired (x, y)."""
        self._require_fitted()
        features = _as_features(X)
        targets = np.asarray(y, dtype=float).reshape(-1, 1)
        if features.shape[0] != targets.shape[0]:
            raise DatasetError(f"{features.shape[0]} observations for {targets.shape[0]} targets")
        raw = np.clip(self.discriminator.predict_proba(np.hstack([features, targets])), 0.0, 1.0)
        return np.minimum(raw, 1.0 - self.epsilon)

    def pdf(self, X, y):
        """Conditional density of y[i] given X[i]."""
        self._require_fitted()
        targets = np.asarray(y, dtype=float).ravel()
        return conditional_from_contrast(self.marginal.pdf(targets), self.contrast(X, targets), self.ratio)

    def predict_pointwise(self, x, y):
        """Conditional density at a single (x, y) pair."""
        return float(self.pdf(_as_features(x), [y])[0])

    def predict_pdf_on_grid(self, x, grid):
        """Conditional density of every grid value given one observation x."""
        grid = check_grid(grid)
        self._require_fitted()
        features = np.repeat(_as_features(x), grid.size, axis=0)
        return conditional_from_contrast(self.marginal.pdf(grid), self.contrast(features, grid), self.ratio)

    def pdf_from_X(self, X, grid):
        grid = check_grid(grid)
        self._require_fitted()
        marginal = self.marginal.pdf(grid)
        rows = []
        for x in _as_features(X):
            features = np.repeat(x.reshape(1, -1), grid.size, axis=0)
            rows.append(conditional_from_contrast(marginal, self.contrast(features, grid), self.ratio))
        return np.vstack(rows)

    def default_grid(self, points):
        """Evenly spaced grid between the 0.001 and 0.999 quantiles of the fitted marginal."""
        self._require_fitted()
        if points < 2:
            raise DatasetError(f"a grid needs at least 2 points, got {points}")
        low, high = (self.marginal.quantile(level) for level in GRID_QUANTILES)
        return np.linspace(low, high, int(points))

    def to_dict(self):
        """Serializable description of the fitted estimator."""
        self._require_fitted()
        return {
            "config": self.config.model_dump(),
            "ratio": self.ratio,
            "contrast_size": self.contrast_size,
            "marginal": self.marginal.model_dump(),
            "discriminator": self.discriminator.to_dict(),
        }

    @classmethod
    def from_dict(cls, data):
        """Rebuild an estimator written by :meth:`to_dict`."""
        try:
            estimator = cls(McdConfig(**data["config"]))
            estimator.ratio = check_ratio(data["ratio"])
            estimator.contrast_size = data.get("contrast_size")
            estimator.marginal = MarginalDensityModel(**data["marginal"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ModelFileError(f"invalid model description: {exc}") from exc
        estimator.discriminator = BaseDiscriminator.from_dict(data["discriminator"])
        return estimator

    def save(self, path, metadata=None):
        """Write the fitted estimator and free-form metadata to a YAML model file."""
        dump_data_to_yaml({"estimator": self.to_dict(), "metadata": metadata or {}}, path)

    @classmethod
    def load(cls, path):
        """Read an estimator from a YAML model file; its metadata ends up in ``metadata``."""
        try:
            data = load_file(path)
        except (OSError, ValueError) as exc:
            raise ModelFileError(f"unable to read model file {path}: {exc}") from exc
        if not isinstance(data, dict) or "estimator" not in data:
            raise ModelFileError(f"model file {path} does not hold a fitted estimator")
        estimator = cls.from_dict(data["estimator"])
        estimator.metadata = dict(data.get("metadata") or {})
        return estimator


class MarginalBaseline(ConditionalEstimator):
    """Predicts the kernel density estimate of the target whatever the observation."""

    name = "Marginal"

    def __init__(self):
        """Create an unfitted baseline."""
        self.marginal: Optional[MarginalDensityModel] = None

    def fit_dataset(self, dataset, extra=None):
        """Fit the KDE on every available target value."""
        targets = dataset.target_values()
        if extra is not None and extra.n_y:
            targets = np.concatenate([targets, extra.extra_y.ravel()])
        self.marginal = fit_kde(targets)
        return self

    def fit(self, X, Y, extra_x=None, extra_y=None):
        targets = np.asarray(Y, dtype=float).ravel()
        if extra_y is not None:
            targets = np.concatenate([targets, np.asarray(extra_y, dtype=float).ravel()])
        self.marginal = fit_kde(targets)
        return self

    def _require_fitted(self):
        if self.marginal is None:
            raise DatasetError("estimator is not fitted")

    def pdf(self, X, y):
        self._require_fitted()
        return self.marginal.pdf(np.asarray(y, dtype=float).ravel())

    def pdf_from_X(self, X, grid):
        grid = check_grid(grid)
        self._require_fitted()
        return np.tile(self.marginal.pdf(grid), (_as_features(X).shape[0], 1))


def train(dataset, extra: Optional[MarginalDatasets], cfg: McdConfig) -> McdEstimator:
    """Fit a contrastive estimator on ``dataset`` with optional additional marginal data."""
    return McdEstimator(cfg).fit_dataset(dataset, extra)

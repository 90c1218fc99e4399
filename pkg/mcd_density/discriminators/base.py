"""Base class and registry for the binary classifiers estimating the contrast."""
# pylint: disable=no-self-argument
from __future__ import annotations

from typing import Dict, List, Optional, Tuple, Type

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, NonNegativeFloat, PositiveFloat, PositiveInt, field_validator
from scipy.special import expit

from mcd_density.datasets import ContrastDataset, Standardization
from mcd_density.exceptions import DatasetError, DegenerateContrastDataset, ModelFileError

DISCRIMINATORS: Dict[str, Type["BaseDiscriminator"]] = {}


def register_discriminator(cls):
    """Class decorator adding a discriminator to the registry under its ``kind``."""
    if cls.kind in DISCRIMINATORS:
        raise ValueError(f"a discriminator named {cls.kind} is already registered")
    DISCRIMINATORS[cls.kind] = cls
    return cls


class ElasticNetParams(BaseModel):
    """Hyper-parameters of the elastic-net penalized logistic regression."""

    model_config = ConfigDict(extra="forbid")

    l1: NonNegativeFloat = 1e-4
    l2: NonNegativeFloat = 1e-4
    max_iter: PositiveInt = 1000
    tolerance: PositiveFloat = 1e-8


class MlpParams(BaseModel):
    """Hyper-parameters of the multilayer perceptron."""

    model_config = ConfigDict(extra="forbid")

    hidden_layers: List[PositiveInt] = Field(default_factory=lambda: [64, 64])
    learning_rate: PositiveFloat = 1e-3
    epochs: PositiveInt = 200
    batch_size: PositiveInt = 64
    dropout: float = Field(0.3, ge=0.0, lt=1.0)


class DiscriminatorSpec(BaseModel):
    """Choice of classifier with its hyper-parameters and seed."""

    model_config = ConfigDict(extra="forbid")

    kind: str = "mlp"
    seed: int = 0
    elasticnet: ElasticNetParams = Field(default_factory=ElasticNetParams)
    mlp: MlpParams = Field(default_factory=MlpParams)

    @field_validator("kind")
    def kind_must_be_registered(cls, kind):
        """Validate that the kind names a registered discriminator."""
        if kind not in DISCRIMINATORS:
            raise ValueError(f"unknown discriminator {kind}, available: {', '.join(sorted(DISCRIMINATORS))}")
        return kind

    @property
    def hyperparameters(self):
        """Record of hyper-parameters of the chosen kind."""
        return DISCRIMINATORS[self.kind].hyperparameters_of(self)

    @property
    def label(self):
        """Short name used in method names, e.g. MLP or E.Net."""
        return DISCRIMINATORS[self.kind].label


def flatten_parameters(parameters: List[np.ndarray]) -> np.ndarray:
    """Concatenate a list of parameter arrays into one vector."""
    return np.concatenate([np.ravel(array) for array in parameters])


def unflatten_parameters(vector: np.ndarray, like: List[np.ndarray]) -> List[np.ndarray]:
    """Split ``vector`` into arrays shaped like ``like``."""
    arrays, start = [], 0
    for array in like:
        arrays.append(np.asarray(vector[start : start + array.size]).reshape(array.shape))
        start += array.size
    return arrays


def cross_entropy(logits, labels):
    """Mean binary cross-entropy of sigmoid(logits) against labels, and its gradient in the logits."""
    loss = float(np.mean(np.logaddexp(0.0, logits) - labels * logits))
    return loss, (expit(logits) - labels) / len(labels)


class BaseDiscriminator:
    """Base class for discriminators.

    Subclasses set ``kind`` and ``label``, and implement ``initial_parameters``, ``logits``,
    ``loss_and_gradient`` and ``optimize``. Inputs are standardized with the record captured at fit
    before they reach the model.
    """

    kind: str = ""
    label: str = ""

    def __init__(self, hyperparameters=None, seed: int = 0):
        """Base init for all discriminators."""
        self.hyperparameters = hyperparameters if hyperparameters is not None else self.default_hyperparameters()
        self.seed = seed
        self.input_width: Optional[int] = None
        self.scaler: Optional[Standardization] = None
        self.parameters: Optional[List[np.ndarray]] = None

    @classmethod
    def default_hyperparameters(cls):
        """Hyper-parameter record used when none is given."""
        raise NotImplementedError

    @classmethod
    def hyperparameters_of(cls, spec: DiscriminatorSpec):
        """Pick the hyper-parameter record of this kind out of ``spec``."""
        raise NotImplementedError

    @property
    def fitted(self):
        """True once parameters are set."""
        return self.parameters is not None

    def initial_parameters(self, input_width: int, rng) -> List[np.ndarray]:
        """Starting point of the optimization."""
        raise NotImplementedError

    def logits(self, parameters: List[np.ndarray], inputs: np.ndarray) -> np.ndarray:
        """Model log-odds of class 1 for standardized inputs."""
        raise NotImplementedError

    def loss_and_gradient(
        self, parameters: List[np.ndarray], inputs: np.ndarray, labels: np.ndarray, rng=None
    ) -> Tuple[float, List[np.ndarray]]:
        """Training objective and its gradient for standardized inputs.

        Args:
          parameters (list): Parameter arrays.
          inputs (numpy.ndarray): Standardized W rows.
          labels (numpy.ndarray): Z labels.
          rng (numpy.random.Generator, optional): Source of training noise, e.g. dropout masks.
        """
        raise NotImplementedError

    def optimize(self, inputs: np.ndarray, labels: np.ndarray, rng) -> List[np.ndarray]:
        """Run the optimizer from ``self.parameters`` and return the final parameters."""
        raise NotImplementedError

    def prepare(self, input_width: int, scaler: Optional[Standardization] = None):
        """Initialize parameters without training.

        Args:
          input_width (int): Width p + k of the W rows.
          scaler (Standardization, optional): Standardization record, identity by default.
        """
        self.input_width = int(input_width)
        self.scaler = scaler if scaler is not None else Standardization.identity(self.input_width)
        self.parameters = self.initial_parameters(self.input_width, np.random.default_rng(self.seed))
        return self

    def fit(self, data: ContrastDataset):
        """Fit on a contrast dataset holding both classes.

        Args:
          data (ContrastDataset): Labelled (W, Z) pairs.

        Returns:
          BaseDiscriminator: self, fitted.
        """
        if data.n_joint == 0 or data.n_marg == 0:
            raise DegenerateContrastDataset(
                f"degenerate contrast dataset: {data.n_joint} matched and {data.n_marg} mismatched samples"
            )
        rng = np.random.default_rng(self.seed)
        self.input_width = data.W.shape[1]
        self.scaler = Standardization.fit(data.W)
        self.parameters = self.initial_parameters(self.input_width, rng)
        self.parameters = self.optimize(self.scaler.transform(data.W), data.Z.astype(float), rng)
        return self

    def predict_proba(self, inputs) -> np.ndarray:
        """Probability of class 1 for each row of ``inputs`` (a single row is accepted).

        Args:
          inputs (array-like): W rows of width p + k.

        Returns:
          numpy.ndarray: One probability in [0, 1] per row.
        """
        if not self.fitted:
            raise DatasetError(f"{self.kind} discriminator is not fitted")
        inputs = np.asarray(inputs, dtype=float)
        if inputs.ndim == 1:
            inputs = inputs.reshape(1, -1)
        if inputs.shape[1] != self.input_width:
            raise DatasetError(f"input width {inputs.shape[1]} does not match fitted width {self.input_width}")
        return expit(self.logits(self.parameters, self.scaler.transform(inputs)))

    def to_dict(self) -> dict:
        """Serializable description of the fitted discriminator."""
        return {
            "kind": self.kind,
            "seed": self.seed,
            "hyperparameters": self.hyperparameters.model_dump(),
            "input_width": self.input_width,
            "scaler": self.scaler.model_dump(),
            "parameters": [array.tolist() for array in self.parameters],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BaseDiscriminator":
        """Rebuild a fitted discriminator written by :meth:`to_dict`."""
        try:
            target = DISCRIMINATORS[data["kind"]]
            hyperparameters = type(target.default_hyperparameters())(**data["hyperparameters"])
            discriminator = target(hyperparameters, seed=data["seed"])
            discriminator.input_width = int(data["input_width"])
            discriminator.scaler = Standardization(**data["scaler"])
            discriminator.parameters = [np.asarray(array, dtype=float) for array in data["parameters"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise ModelFileError(f"invalid discriminator description: {exc}") from exc
        return discriminator


def build_discriminator(spec: DiscriminatorSpec) -> BaseDiscriminator:
    """Instantiate an unfitted discriminator from its spec."""
    return DISCRIMINATORS[spec.kind](spec.hyperparameters, seed=spec.seed)


def fit_discriminator(spec: DiscriminatorSpec, data: ContrastDataset) -> BaseDiscriminator:
    """Instantiate and fit a discriminator."""
    return build_discriminator(spec).fit(data)

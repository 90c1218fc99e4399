"""Discriminators estimating the probability that a (x, y) pair is matched."""
from mcd_density.discriminators.base import (
    DISCRIMINATORS,
    BaseDiscriminator,
    DiscriminatorSpec,
    ElasticNetParams,
    MlpParams,
    build_discriminator,
    fit_discriminator,
    register_discriminator,
)
from mcd_density.discriminators.logistic import ElasticNetLogistic
from mcd_density.discriminators.mlp import MlpDiscriminator, MlpNoDropout

__all__ = [
    "DISCRIMINATORS",
    "BaseDiscriminator",
    "DiscriminatorSpec",
    "ElasticNetLogistic",
    "ElasticNetParams",
    "MlpDiscriminator",
    "MlpNoDropout",
    "MlpParams",
    "build_discriminator",
    "fit_discriminator",
    "register_discriminator",
]

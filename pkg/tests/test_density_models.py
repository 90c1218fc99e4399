"""Tests for the synthetic density models."""
import math

import numpy as np
import pytest
from scipy import stats
from scipy.integrate import trapezoid
from scipy.special import gammaln

from mcd_density.contrast import contrast_from_conditional, marginal_contrast_values
from mcd_density.density_models import (
    DENSITY_MODELS,
    asymmetric_linear,
    basic_linear,
    bivariate_gauss_oracle,
    gaussian_mixt_sub,
    get_density_model,
    linear_gauss_sub,
    linear_student_sub,
)
from mcd_density.exceptions import DatasetError, UnknownDensityModel

MODELS = [
    basic_linear(3),
    asymmetric_linear(3),
    linear_gauss_sub(3),
    linear_student_sub(3),
    gaussian_mixt_sub(3),
    bivariate_gauss_oracle(0.8),
]


@pytest.mark.parametrize("model", MODELS, ids=[model.key for model in MODELS])
def test_conditional_pdf_integrates_to_one(model):
    generator = np.random.default_rng(0)
    X = model.sample_features(20, generator)
    location, spread = model.location(X), model.spread(X)
    for index in range(20):
        grid = np.linspace(location[index] - 8 * spread[index], location[index] + 8 * spread[index], 10_000)
        assert trapezoid(model.conditional_pdf(X[index], grid), grid) == pytest.approx(1.0, abs=1e-3)


@pytest.mark.parametrize("model", MODELS, ids=[model.key for model in MODELS])
def test_sampler_deterministic(model):
    first = model.sample(10, np.random.default_rng(3))
    second = model.sample(10, np.random.default_rng(3))
    np.testing.assert_array_equal(first.X, second.X)
    np.testing.assert_array_equal(first.Y, second.Y)


def test_beta_frozen_by_seed():
    np.testing.assert_array_equal(basic_linear(4, seed=2).beta, basic_linear(4, seed=2).beta)
    assert not np.array_equal(basic_linear(4, seed=2).beta, basic_linear(4, seed=3).beta)
    beta = basic_linear(4, seed=2).beta
    assert np.all((beta >= 0) & (beta <= 1))


def test_basic_linear_mode_and_symmetry():
    model = basic_linear(2, sigma=0.3)
    x = np.array([0.4, -1.0])
    center = float(x @ model.beta)
    assert model.conditional_pdf(x, [center])[0] == pytest.approx(1 / (0.3 * math.sqrt(2 * math.pi)))
    offsets = np.linspace(0.1, 1.0, 5)
    np.testing.assert_allclose(model.conditional_pdf(x, center + offsets), model.conditional_pdf(x, center - offsets))


def test_basic_linear_noise_centered():
    model = basic_linear(2, sigma=0.3)
    data = model.sample(100_000, np.random.default_rng(1))
    residual = data.Y.ravel() - data.X @ model.beta
    assert abs(residual.mean()) < 3 * 0.3 / math.sqrt(100_000)


def test_asymmetric_linear_support():
    model = asymmetric_linear(2, sigma=0.3)
    x = np.array([1.0, 0.5])
    center = float(x @ model.beta)
    np.testing.assert_array_equal(model.conditional_pdf(x, center - np.linspace(0.01, 2, 5)), 0.0)
    assert model.conditional_pdf(x, [center])[0] == pytest.approx(2 / (0.3 * math.sqrt(2 * math.pi)))
    data = model.sample(1000, np.random.default_rng(2))
    assert np.all(data.Y.ravel() >= data.X @ model.beta)


def test_linear_gauss_without_slope_is_independent():
    model = linear_gauss_sub(2, a=1.0, b=0.0, sigma=0.5)
    grid = np.linspace(-1, 3, 9)
    for x in np.random.default_rng(0).normal(size=(4, 2)):
        np.testing.assert_allclose(model.conditional_pdf(x, grid), stats.norm.pdf(grid, 1.0, 0.5))


def test_linear_gauss_contrast_roundtrip():
    model = linear_gauss_sub(1)
    x = np.array([[0.3]] * 5)
    y = np.linspace(-1, 1, 5)
    conditional = model.pdf(x, y)
    marginal = model.marginal_pdf(y)
    joint = conditional * stats.norm.pdf(0.3)
    expected = marginal_contrast_values(joint, stats.norm.pdf(0.3), marginal, 0.2)
    np.testing.assert_allclose(contrast_from_conditional(conditional, marginal, 0.2), expected)


def test_student_peak():
    model = linear_student_sub(1, dof=5.0, scale=0.5)
    x = np.array([0.2])
    location = model.location(x.reshape(1, -1))[0]
    expected = math.exp(gammaln(3.0) - gammaln(2.5)) / math.sqrt(5 * math.pi) / 0.5
    assert model.conditional_pdf(x, [location])[0] == pytest.approx(expected)


def test_student_tails_heavier_than_normal():
    model = linear_student_sub(1, dof=3.0, scale=0.5)
    x = np.array([0.0])
    location = model.location(x.reshape(1, -1))[0]
    assert model.conditional_pdf(x, [location + 10 * 0.5])[0] > stats.norm.pdf(10.0) / 0.5


def test_mixture_single_component():
    model = gaussian_mixt_sub(2, weights=(1.0, 0.0), means=(0.0, 3.0), scales=(0.7, 0.1))
    x = np.array([0.5, 0.5])
    grid = np.linspace(-2, 3, 11)
    np.testing.assert_allclose(model.conditional_pdf(x, grid), stats.norm.pdf(grid, 1.0 / math.sqrt(2), 0.7))


@pytest.mark.parametrize(
    "weights, means, scales",
    [((0.6, 0.6), (0.0, 1.0), (1.0, 1.0)), ((-0.5, 1.5), (0.0, 1.0), (1.0, 1.0)), ((0.5, 0.5), (0.0,), (1.0,))],
)
def test_mixture_invalid(weights, means, scales):
    with pytest.raises(DatasetError):
        gaussian_mixt_sub(1, weights=weights, means=means, scales=scales)


def test_bivariate_contrast():
    independent = bivariate_gauss_oracle(0.0)
    np.testing.assert_allclose(independent.contrast([0.5, -1.0], [2.0, 0.1], 0.3), 0.3)
    assert bivariate_gauss_oracle(0.8).contrast([0.0], [0.0], 0.5)[0] == pytest.approx(0.625)


def test_bivariate_conditional():
    model = bivariate_gauss_oracle(0.8)
    grid = np.linspace(-3, 3, 7)
    np.testing.assert_allclose(model.conditional_pdf([1.0], grid), stats.norm.pdf(grid, 0.8, 0.6))


def test_bivariate_rejects_invalid():
    with pytest.raises(DatasetError):
        bivariate_gauss_oracle(1.0)
    with pytest.raises(DatasetError):
        get_density_model("bivariate_gauss", feature_dim=2)


def test_multi_sampler_shape():
    data = basic_linear(3).sample_multi(7, 4, np.random.default_rng(0))
    assert data.X.shape == (7, 3)
    assert data.Y.shape == (7, 4)


def test_registry_lookup():
    assert set(DENSITY_MODELS) == {
        "basic_linear",
        "asymmetric_linear",
        "linear_gauss",
        "linear_student",
        "gaussian_mixt",
        "bivariate_gauss",
    }
    assert get_density_model("BasicLinear", feature_dim=2).key == "basic_linear"
    assert get_density_model("linear_student", feature_dim=2, dof=3.0).dof == 3.0
    with pytest.raises(UnknownDensityModel, match="available models"):
        get_density_model("EconDensity")


def test_feature_width_checked():
    with pytest.raises(DatasetError):
        basic_linear(3).pdf(np.ones((2, 2)), [0.0, 0.0])

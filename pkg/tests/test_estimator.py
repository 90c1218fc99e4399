"""Tests for the contrastive estimator and the marginal baseline."""
import math
import os

import numpy as np
import pytest
from scipy import stats
from scipy.integrate import trapezoid

from mcd_density.datasets import MarginalDatasets, MultiTargetDataset, SupervisedDataset
from mcd_density.density_models import get_density_model
from mcd_density.discriminators import DiscriminatorSpec, ElasticNetParams
from mcd_density.estimator import McdConfig, McdEstimator, MarginalBaseline, check_grid, rescale, train
from mcd_density.exceptions import DatasetError, DegenerateDensity, IncompatibleConstruction, ModelFileError
from mcd_density.marginal import fit_kde
from mcd_density.metrics import empirical_kl

LOGISTIC = DiscriminatorSpec(kind="logistic_elasticnet", elasticnet=ElasticNetParams(max_iter=200))


class ConstantDiscriminator:  # pylint: disable=too-few-public-methods
    """Discriminator stand-in predicting the same probability everywhere."""

    def __init__(self, value, input_width=2):
        self.value = value
        self.input_width = input_width

    def predict_proba(self, inputs):
        inputs = np.atleast_2d(inputs)
        assert inputs.shape[1] == self.input_width
        return np.full(inputs.shape[0], self.value)


def _stubbed(value, ratio=0.3):
    marginal = fit_kde([-1.0, 0.0, 0.5, 2.0])
    return McdEstimator.from_parts(marginal, ConstantDiscriminator(value), ratio), marginal


def test_contrast_equal_ratio_gives_marginal():
    estimator, marginal = _stubbed(0.3)
    targets = np.linspace(-2, 3, 7)
    np.testing.assert_allclose(estimator.pdf(np.zeros((7, 1)), targets), marginal.pdf(targets), rtol=1e-12)


def test_contrast_one_is_thresholded():
    estimator, marginal = _stubbed(1.0, ratio=0.5)
    value = estimator.predict_pointwise([0.0], 0.5)
    expected = marginal.pdf(0.5) * (1 - 1e-6) / 1e-6
    assert math.isfinite(value)
    assert value == pytest.approx(expected, rel=1e-9)


def test_contrast_zero_gives_zero():
    estimator, _ = _stubbed(0.0)
    assert estimator.predict_pointwise([1.0], 0.2) == 0.0


def test_threshold_only_binds_near_one():
    estimator, marginal = _stubbed(0.6, ratio=0.2)
    expected = marginal.pdf(0.1) * 0.6 / 0.4 * 0.8 / 0.2
    assert estimator.predict_pointwise([0.3], 0.1) == pytest.approx(expected, rel=1e-14)


def test_predictions_finite_and_nonnegative():
    for value in (0.0, 1.0):
        estimator, _ = _stubbed(value)
        predictions = estimator.pdf_from_X(np.zeros((3, 1)), np.linspace(-3, 3, 25))
        assert np.all(np.isfinite(predictions)) and np.all(predictions >= 0)


def test_grid_with_constant_ratio():
    estimator, marginal = _stubbed(0.3)
    grid = np.linspace(-2, 3, 11)
    np.testing.assert_allclose(estimator.predict_pdf_on_grid([0.7], grid), marginal.pdf(grid), rtol=1e-12)
    matrix = estimator.pdf_from_X(np.array([[0.1], [0.2]]), grid)
    assert matrix.shape == (2, 11)


@pytest.mark.parametrize("grid", [[0.0, 2.0, 1.0], [1.0], [0.0, 0.0, 1.0]])
def test_invalid_grids(grid):
    with pytest.raises(DatasetError):
        check_grid(grid)


def test_rescale_examples():
    np.testing.assert_allclose(rescale(np.full(5, 3.0), np.linspace(0, 4, 5)), 0.25)
    np.testing.assert_allclose(rescale([0.0, 2.0, 0.0], [0.0, 1.0, 2.0]), [0.0, 1.0, 0.0])


def test_rescale_normalized_density():
    grid = np.linspace(-5, 5, 10_000)
    values = stats.norm.pdf(grid)
    np.testing.assert_allclose(rescale(values, grid) / values, 1.0, atol=1e-4)


def test_rescale_idempotent(rng):
    grid = np.sort(rng.uniform(-3, 3, 40))
    values = rng.uniform(0, 2, size=(4, 40))
    once = rescale(values, grid)
    np.testing.assert_allclose(rescale(once, grid), once, atol=1e-12)


def test_rescale_degenerate():
    with pytest.raises(DegenerateDensity, match="degenerate density"):
        rescale(np.zeros(4), np.arange(4.0))


def test_default_grid_endpoints():
    estimator, marginal = _stubbed(0.3)
    grid = estimator.default_grid(2)
    assert grid.tolist() == [marginal.quantile(0.001), marginal.quantile(0.999)]


def test_default_grid_symmetric():
    estimator = McdEstimator.from_parts(fit_kde([-2.0, -1.0, 1.0, 2.0]), ConstantDiscriminator(0.3), 0.3)
    grid = estimator.default_grid(11)
    np.testing.assert_allclose(grid, -grid[::-1], atol=1e-9)


def test_unfitted_estimator():
    with pytest.raises(DatasetError, match="not fitted"):
        McdEstimator().pdf([[0.0]], [0.0])


def test_config_validation():
    with pytest.raises(ValueError):
        McdConfig(ratio=1.0)
    with pytest.raises(ValueError):
        McdConfig(construction="bootstrap")
    with pytest.raises(ValueError):
        McdConfig(epsilon=0.5)


def test_fit_id_contrast_size(distinct_dataset):
    estimator = train(distinct_dataset, None, McdConfig(ratio=0.05, discriminator=LOGISTIC))
    assert estimator.contrast_size == 2000
    assert estimator.ratio == pytest.approx(0.05)
    assert estimator.name == "MCD:E.Net"


def test_fit_iid_uses_configured_ratio(distinct_dataset):
    estimator = train(distinct_dataset, None, McdConfig(ratio=0.5, construction="iid", discriminator=LOGISTIC))
    assert estimator.contrast_size == 50
    assert estimator.ratio == 0.5


def test_fit_iid_additional(distinct_dataset):
    extra = MarginalDatasets(extra_x=np.random.default_rng(3).normal(size=(100, 3)))
    cfg = McdConfig(ratio=0.5, construction="iid_additional", discriminator=LOGISTIC)
    assert train(distinct_dataset, extra, cfg).contrast_size == 100


def test_fit_additional_targets_enter_marginal(distinct_dataset):
    extra_y = np.random.default_rng(3).normal(size=(30, 1))
    cfg = McdConfig(ratio=0.05, construction="id_additional", discriminator=LOGISTIC)
    estimator = train(distinct_dataset, MarginalDatasets(extra_y=extra_y), cfg)
    assert estimator.marginal.sample_count == 130


def test_fit_multitarget():
    generator = np.random.default_rng(4)
    cfg = McdConfig(ratio=0.5, construction="id_multitarget", discriminator=LOGISTIC)
    estimator = McdEstimator(cfg).fit(generator.normal(size=(100, 2)), generator.normal(size=(100, 2)))
    assert estimator.contrast_size == 400


def test_incompatible_constructions(distinct_dataset):
    multi = MultiTargetDataset(X=distinct_dataset.X, Y=np.hstack([distinct_dataset.Y, distinct_dataset.Y + 1]))
    with pytest.raises(IncompatibleConstruction):
        McdEstimator(McdConfig(discriminator=LOGISTIC)).fit_dataset(multi)
    with pytest.raises(IncompatibleConstruction):
        McdEstimator(McdConfig(construction="id_multitarget", discriminator=LOGISTIC)).fit_dataset(distinct_dataset)
    with pytest.raises(IncompatibleConstruction):
        McdEstimator(McdConfig(construction="id_additional", discriminator=LOGISTIC)).fit_dataset(distinct_dataset)
    with pytest.raises(IncompatibleConstruction):
        McdEstimator(McdConfig(discriminator=LOGISTIC)).fit_dataset(
            distinct_dataset, MarginalDatasets(extra_y=[[0.0]])
        )


def test_multivariate_target_rejected():
    dataset = SupervisedDataset(X=np.eye(3), Y=np.eye(3)[:, :2])
    with pytest.raises(DatasetError, match="univariate"):
        McdEstimator(McdConfig(discriminator=LOGISTIC)).fit_dataset(dataset)


def test_pipeline_deterministic(distinct_dataset):
    cfg = McdConfig(ratio=0.15, seed=3, discriminator=DiscriminatorSpec(kind="mlp", mlp={"hidden_layers": [8], "epochs": 3}))
    grid = np.linspace(-2, 2, 30)
    first = train(distinct_dataset, None, cfg).pdf_from_X(distinct_dataset.X[:5], grid)
    second = train(distinct_dataset, None, cfg).pdf_from_X(distinct_dataset.X[:5], grid)
    np.testing.assert_array_equal(first, second)


def test_save_and_load(distinct_dataset, tmp_path):
    estimator = train(distinct_dataset, None, McdConfig(ratio=0.15, discriminator=LOGISTIC))
    path = os.path.join(tmp_path, "model.yml")
    estimator.save(path, metadata={"target": "y"})
    restored = McdEstimator.load(path)
    grid = np.linspace(-2, 2, 15)
    np.testing.assert_allclose(
        restored.pdf_from_X(distinct_dataset.X[:3], grid), estimator.pdf_from_X(distinct_dataset.X[:3], grid)
    )
    assert restored.metadata == {"target": "y"}
    assert restored.ratio == estimator.ratio
    assert restored.contrast_size == estimator.contrast_size


def test_load_invalid_file(tmp_path):
    path = os.path.join(tmp_path, "model.yml")
    with open(path, "w", encoding="utf-8") as fileh:
        fileh.write("just: a mapping\n")
    with pytest.raises(ModelFileError):
        McdEstimator.load(path)
    with pytest.raises(ModelFileError):
        McdEstimator.load(os.path.join(tmp_path, "missing.yml"))


def test_marginal_baseline(distinct_dataset):
    baseline = MarginalBaseline().fit(distinct_dataset.X, distinct_dataset.Y)
    grid = np.linspace(-3, 3, 9)
    matrix = baseline.pdf_from_X(distinct_dataset.X[:4], grid)
    assert matrix.shape == (4, 9)
    np.testing.assert_allclose(matrix[0], matrix[3])
    np.testing.assert_allclose(baseline.pdf(distinct_dataset.X[:2], [0.0, 0.0]), baseline.marginal.pdf([0.0, 0.0]))


@pytest.mark.slow
def test_mcd_beats_marginal_baseline():
    model = get_density_model("linear_gauss", feature_dim=1, seed=0)
    generator = np.random.default_rng(0)
    dataset = model.sample(200, generator)
    features = model.sample_features(50, generator)
    grid = np.linspace(-4, 4, 400)
    truth = model.conditional_pdf_matrix(features, grid)
    estimator = train(dataset, None, McdConfig(ratio=0.15, seed=0))
    baseline = MarginalBaseline().fit_dataset(dataset)
    mcd_kl = empirical_kl(truth, estimator.pdf_from_X(features, grid))
    baseline_kl = empirical_kl(truth, baseline.pdf_from_X(features, grid))
    assert mcd_kl < baseline_kl


def _gaussian_oracle_fit(rho, n, ratio, kind="mlp", seed=11):
    oracle = get_density_model("bivariate_gauss", rho=rho)
    generator = np.random.default_rng(seed)
    dataset = oracle.sample(n, generator)
    cfg = McdConfig(ratio=ratio, construction="id", seed=seed, discriminator=DiscriminatorSpec(kind=kind))
    return oracle, train(dataset, None, cfg), generator


@pytest.mark.slow
def test_contrast_recovery_on_bivariate_gaussian():
    oracle, estimator, generator = _gaussian_oracle_fit(rho=0.8, n=2000, ratio=0.05)
    assert estimator.contrast_size == 40000
    held_out = oracle.sample(500, generator)
    estimated = estimator.contrast(held_out.X, held_out.target_values())
    exact = oracle.contrast(held_out.X[:, 0], held_out.target_values(), estimator.ratio)
    assert np.mean(np.abs(estimated - exact)) <= 0.1


@pytest.mark.slow
def test_contrast_calibrated_under_independence():
    oracle, estimator, generator = _gaussian_oracle_fit(rho=0.0, n=2000, ratio=0.05)
    held_out = oracle.sample(500, generator)
    estimated = estimator.contrast(held_out.X, held_out.target_values())
    assert np.mean(estimated) == pytest.approx(estimator.ratio, abs=0.05)


@pytest.fixture(scope="module")
def gaussian_density_fit():
    return _gaussian_oracle_fit(rho=0.8, n=5000, ratio=0.15, kind="mlp_nodropout", seed=5)


@pytest.mark.slow
def test_pointwise_density_on_bivariate_gaussian(gaussian_density_fit):
    oracle, estimator, generator = gaussian_density_fit
    candidates = oracle.sample(2000, generator)
    x, y = candidates.X[:, 0], candidates.target_values()
    truth = oracle.pdf(candidates.X, y)
    keep = np.flatnonzero(truth > 0.05)[:100]
    assert keep.size == 100
    predicted = np.array([estimator.predict_pointwise([x[index]], y[index]) for index in keep])
    assert np.all(np.abs(predicted - truth[keep]) <= 0.25 * truth[keep])


@pytest.mark.slow
def test_rescaled_density_recovery_on_bivariate_gaussian(gaussian_density_fit):
    oracle, estimator, generator = gaussian_density_fit
    features = oracle.sample_features(50, generator)
    grid = np.linspace(-4.0, 4.0, 1000)
    truth = oracle.conditional_pdf_matrix(features, grid)
    predicted = np.vstack([rescale(row, grid) for row in estimator.pdf_from_X(features, grid)])
    distances = trapezoid(np.abs(predicted - truth), grid, axis=1)
    assert np.mean(distances) <= 0.25

"""Tests for the contrast dataset constructions."""
import numpy as np
import pytest

from mcd_density.constructions import (
    build_id,
    build_id_additional,
    build_id_multitarget,
    build_iid,
    build_iid_additional,
    mismatched_pool_size,
    ratio_to_counts,
    sample_ranks,
)
from mcd_density.datasets import MarginalDatasets, MultiTargetDataset, SupervisedDataset
from mcd_density.exceptions import ConstructionError


class StubRandom:  # pylint: disable=too-few-public-methods
    """Generator stand-in returning fixed uniform draws."""

    def __init__(self, draws):
        self.draws = np.asarray(draws, dtype=float)

    def random(self, size):
        assert size == self.draws.size
        return self.draws


class AlwaysOne:  # pylint: disable=too-few-public-methods
    """Generator stand-in whose uniform draws all equal 1, so every Bernoulli label is 0."""

    @staticmethod
    def random(size):
        return np.ones(size)


def _line_dataset(n, width=1):
    X = np.arange(n * width, dtype=float).reshape(n, width)
    Y = 1000.0 + np.arange(n, dtype=float)
    return SupervisedDataset(X=X, Y=Y)


def _pairs(contrast):
    return {(int(x), int(y), int(z)) for x, y, z in zip(contrast.x_origin, contrast.y_origin, contrast.Z)}


def _assert_faithful(contrast, x_table, y_table):
    """Every W row is the concatenation of the rows its origins point to."""
    expected = np.hstack([x_table[contrast.x_origin], y_table[contrast.y_origin]])
    np.testing.assert_array_equal(contrast.W, expected)


def test_iid_size_and_fidelity(distinct_dataset, rng):
    contrast = build_iid(distinct_dataset, 0.5, rng)
    assert contrast.size == 50
    _assert_faithful(contrast, distinct_dataset.X, distinct_dataset.Y)
    matched = contrast.Z == 1
    np.testing.assert_array_equal(contrast.x_origin[matched], contrast.y_origin[matched])
    np.testing.assert_array_equal(contrast.y_origin[~matched], contrast.x_origin[~matched] + 50)


def test_iid_stubbed_draws():
    dataset = _line_dataset(5)
    contrast = build_iid(dataset, 0.3, StubRandom([0.1, 0.9]))
    assert contrast.size == 2
    np.testing.assert_array_equal(contrast.Z, [1, 0])
    np.testing.assert_array_equal(contrast.W[0], [0.0, 1000.0])
    np.testing.assert_array_equal(contrast.W[1], [1.0, 1003.0])


def test_iid_too_small():
    with pytest.raises(ConstructionError, match="dataset too small for i.i.d. construction"):
        build_iid(_line_dataset(1), 0.5, np.random.default_rng(0))


def _pooled_label_fraction(build, runs=10_000):
    matched = total = 0
    for seed in range(runs):
        contrast = build(np.random.default_rng(seed))
        same = contrast.x_origin == contrast.y_origin
        assert np.array_equal(same, contrast.Z == 1)
        matched += int(contrast.Z.sum())
        total += contrast.size
    return matched / total, total


@pytest.mark.parametrize("ratio", [0.5, 0.15])
def test_iid_label_law(ratio):
    dataset = _line_dataset(100)
    fraction, total = _pooled_label_fraction(lambda generator: build_iid(dataset, ratio, generator))
    assert total == 10_000 * 50
    assert abs(fraction - ratio) <= 3 * np.sqrt(ratio * (1 - ratio) / total)


def test_iid_additional_label_law():
    dataset = _line_dataset(100)
    extra = MarginalDatasets(extra_x=-np.arange(25.0).reshape(-1, 1), extra_y=-np.arange(1.0, 26.0).reshape(-1, 1))
    fraction, total = _pooled_label_fraction(lambda generator: build_iid_additional(dataset, extra, 0.5, generator))
    assert total == 10_000 * 75
    assert abs(fraction - 0.5) <= 3 * np.sqrt(0.25 / total)


def test_id_sizes_and_ratio(distinct_dataset, rng):
    contrast = build_id(distinct_dataset, 100, 1900, rng)
    assert contrast.size == 2000
    assert contrast.n_joint == 100
    assert contrast.ratio == pytest.approx(0.05)
    _assert_faithful(contrast, distinct_dataset.X, distinct_dataset.Y)


def test_id_candidates_are_distinct(distinct_dataset, rng):
    contrast = build_id(distinct_dataset, 80, 3000, rng)
    pairs = list(zip(contrast.x_origin.tolist(), contrast.y_origin.tolist()))
    assert len(set(pairs)) == len(pairs)
    assert all((x == y) == bool(z) for (x, y), z in zip(pairs, contrast.Z))


def test_id_exhaustive_two_rows():
    contrast = build_id(_line_dataset(2), 2, 2, np.random.default_rng(0))
    assert _pairs(contrast) == {(0, 0, 1), (1, 1, 1), (0, 1, 0), (1, 0, 0)}


def test_id_maximal_set():
    contrast = build_id(_line_dataset(3), 3, 6, np.random.default_rng(0))
    assert contrast.size == 9
    assert {(x, y) for x, y, _ in _pairs(contrast)} == {(x, y) for x in range(3) for y in range(3)}


@pytest.mark.parametrize("n_joint, n_marg", [(0, 5), (101, 5), (10, 0), (10, 9901)])
def test_id_count_bounds(distinct_dataset, n_joint, n_marg):
    with pytest.raises(ConstructionError):
        build_id(distinct_dataset, n_joint, n_marg, np.random.default_rng(0))


def test_id_duplicate_rows():
    dataset = SupervisedDataset(X=[[0.0], [0.0], [1.0]], Y=[0.0, 1.0, 2.0])
    with pytest.raises(ConstructionError, match="duplicate rows"):
        build_id(dataset, 3, 3, np.random.default_rng(0))


def test_id_deterministic(distinct_dataset):
    first = build_id(distinct_dataset, 100, 500, np.random.default_rng(42))
    second = build_id(distinct_dataset, 100, 500, np.random.default_rng(42))
    np.testing.assert_array_equal(first.W, second.W)
    np.testing.assert_array_equal(first.Z, second.Z)


def test_id_shuffled(distinct_dataset, rng):
    contrast = build_id(distinct_dataset, 100, 100, rng)
    assert not np.array_equal(contrast.Z, np.sort(contrast.Z)[::-1])


@pytest.mark.parametrize(
    "n_x, n_y, expected",
    [(0, 0, 50), (100, 0, 100), (0, 100, 100), (25, 25, 75)],
)
def test_iid_additional_sizes(distinct_dataset, n_x, n_y, expected):
    generator = np.random.default_rng(5)
    extra = MarginalDatasets(
        extra_x=generator.normal(size=(n_x, 3)) if n_x else None,
        extra_y=generator.normal(size=(n_y, 1)) if n_y else None,
    )
    contrast = build_iid_additional(distinct_dataset, extra, 0.5, np.random.default_rng(0))
    assert contrast.size == expected
    x_table = np.vstack([distinct_dataset.X, extra.x_pool(3)])
    y_table = np.vstack([distinct_dataset.Y, extra.y_pool(1)])
    _assert_faithful(contrast, x_table, y_table)
    matched = contrast.Z == 1
    np.testing.assert_array_equal(contrast.x_origin[matched], contrast.y_origin[matched])
    assert np.all(contrast.x_origin[matched] < 100)


def test_iid_additional_without_extras_matches_iid(distinct_dataset):
    plain = build_iid(distinct_dataset, 0.3, np.random.default_rng(9))
    extended = build_iid_additional(distinct_dataset, MarginalDatasets(), 0.3, np.random.default_rng(9))
    np.testing.assert_array_equal(plain.W, extended.W)
    np.testing.assert_array_equal(plain.Z, extended.Z)


def test_iid_additional_mismatched_use_pools():
    dataset = _line_dataset(10)
    extra = MarginalDatasets(extra_x=[[-1.0], [-2.0], [-3.0]], extra_y=[[-10.0], [-20.0]])
    contrast = build_iid_additional(dataset, extra, 0.5, AlwaysOne())
    assert contrast.n_joint == 0
    assert sorted(contrast.x_origin[:3].tolist()) == [10, 11, 12]
    assert sorted(contrast.y_origin[3:5].tolist()) == [10, 11]


def test_id_additional_size(distinct_dataset, rng):
    extra = MarginalDatasets(extra_x=np.random.default_rng(1).normal(size=(500, 3)))
    n_joint, n_marg = ratio_to_counts(100, 0.05, mismatched_pool_size(100, 500, 0))
    contrast = build_id_additional(distinct_dataset, extra, n_joint, n_marg, rng)
    assert contrast.size == 2000
    x_table = np.vstack([distinct_dataset.X, extra.x_pool(3)])
    _assert_faithful(contrast, x_table, distinct_dataset.Y)
    mismatched = contrast.Z == 0
    assert np.all(contrast.y_origin < 100)
    assert np.any(contrast.x_origin[mismatched] >= 100)


def test_id_additional_full_pool():
    dataset = _line_dataset(2)
    extra = MarginalDatasets(extra_x=[[-1.0]], extra_y=[[-5.0]])
    pool = mismatched_pool_size(2, 1, 1)
    assert pool == 7
    contrast = build_id_additional(dataset, extra, 2, pool, np.random.default_rng(0))
    pairs = {(x, y) for x, y, _ in _pairs(contrast)}
    assert pairs == {(x, y) for x in range(3) for y in range(3)}
    assert {(x, y) for x, y, z in _pairs(contrast) if z == 1} == {(0, 0), (1, 1)}


def test_id_additional_without_extras_matches_id(distinct_dataset):
    plain = build_id(distinct_dataset, 100, 300, np.random.default_rng(4))
    extended = build_id_additional(distinct_dataset, MarginalDatasets(), 100, 300, np.random.default_rng(4))
    np.testing.assert_array_equal(plain.W, extended.W)


def test_id_additional_width_mismatch(distinct_dataset, rng):
    with pytest.raises(ValueError):
        build_id_additional(distinct_dataset, MarginalDatasets(extra_x=np.ones((3, 2))), 10, 10, rng)


def test_multitarget_sizes():
    generator = np.random.default_rng(2)
    dataset = MultiTargetDataset(X=generator.normal(size=(100, 2)), Y=generator.normal(size=(100, 10)))
    n_joint, n_marg = ratio_to_counts(1000, 0.05, mismatched_pool_size(100, m=10))
    contrast = build_id_multitarget(dataset, n_joint, n_marg, generator)
    assert contrast.size == 20000
    assert contrast.W.shape == (20000, 3)
    _assert_faithful(contrast, dataset.X, dataset.Y.reshape(-1, 1))
    matched = contrast.Z == 1
    np.testing.assert_array_equal(contrast.y_origin[matched] // 10, contrast.x_origin[matched])
    assert np.all(contrast.y_origin[~matched] // 10 != contrast.x_origin[~matched])


def test_multitarget_full_grid():
    dataset = MultiTargetDataset(X=[[0.0], [1.0]], Y=[[10.0, 11.0], [20.0, 21.0]])
    contrast = build_id_multitarget(dataset, 4, 4, np.random.default_rng(0))
    assert _pairs(contrast) == {
        (0, 0, 1),
        (0, 1, 1),
        (1, 2, 1),
        (1, 3, 1),
        (0, 2, 0),
        (0, 3, 0),
        (1, 0, 0),
        (1, 1, 0),
    }


def test_multitarget_single_target_matches_id(distinct_dataset):
    multi = MultiTargetDataset(X=distinct_dataset.X, Y=distinct_dataset.Y)
    plain = build_id(distinct_dataset, 100, 400, np.random.default_rng(8))
    extended = build_id_multitarget(multi, 100, 400, np.random.default_rng(8))
    np.testing.assert_array_equal(plain.W, extended.W)
    np.testing.assert_array_equal(plain.Z, extended.Z)


@pytest.mark.parametrize(
    "n_joint, ratio, cap, expected",
    [
        (100, 0.05, 9900, (100, 1900)),
        (100, 0.5, 9900, (100, 100)),
        (1000, 0.15, 999000, (1000, 5666)),
        (200, 0.15, 39600, (200, 1133)),
        (100, 0.01, 9900, (100, 9900)),
    ],
)
def test_ratio_to_counts(n_joint, ratio, cap, expected):
    assert ratio_to_counts(n_joint, ratio, cap) == expected


def test_ratio_to_counts_no_mismatched():
    with pytest.raises(ConstructionError):
        ratio_to_counts(1, 0.9, 10)


def test_ratio_to_counts_capped():
    assert ratio_to_counts(10, 0.01, 90) == (10, 90)


def test_sample_ranks_distinct_and_in_range(rng):
    picks = sample_ranks(10**12, 1000, rng)
    assert len(set(picks.tolist())) == 1000
    assert picks.min() >= 0 and picks.max() < 10**12


def test_sample_ranks_full_permutation(rng):
    assert sorted(sample_ranks(50, 50, rng).tolist()) == list(range(50))


def test_sample_ranks_too_many(rng):
    with pytest.raises(ConstructionError):
        sample_ranks(3, 4, rng)


def test_sample_ranks_uniform():
    counts = np.zeros(5)
    generator = np.random.default_rng(11)
    for _ in range(5000):
        counts[sample_ranks(5, 1, generator)[0]] += 1
    assert np.all(np.abs(counts / 5000 - 0.2) < 0.03)

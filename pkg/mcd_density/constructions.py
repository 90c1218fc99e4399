"""Contrast dataset constructions.

Every builder returns a :class:`~mcd_density.datasets.ContrastDataset` whose matched rows (Z = 1)
pair an observation with its own target and whose mismatched rows (Z = 0) pair an observation with
the target of another source row or with a row of a marginal pool. All randomness comes from the
numpy Generator passed in, so identical seeds give bit-identical datasets.
"""
import math

import numpy as np

from mcd_density.contrast import check_ratio
from mcd_density.datasets import ContrastDataset, MarginalDatasets, MultiTargetDataset, SupervisedDataset
from mcd_density.exceptions import ConstructionError

CONSTRUCTIONS = ("iid", "id", "iid_additional", "id_additional", "id_multitarget")
IID_CONSTRUCTIONS = ("iid", "iid_additional")


def _bernoulli(rng, size, ratio):
    return (rng.random(size) < ratio).astype(np.int64)


def _assemble(x_table, y_table, x_origin, y_origin, labels):
    x_origin = np.asarray(x_origin, dtype=np.int64)
    y_origin = np.asarray(y_origin, dtype=np.int64)
    W = np.hstack([x_table[x_origin], y_table[y_origin]])
    return ContrastDataset(W=W, Z=labels, x_origin=x_origin, y_origin=y_origin)


def build_iid(dataset: SupervisedDataset, ratio: float, rng) -> ContrastDataset:
    """Build the i.i.d. contrast dataset of size floor(n / 2).

    Row i keeps its own target with probability ``ratio`` and otherwise borrows the target of row
    i + N, so that no source row is used twice.

    Args:
        dataset (SupervisedDataset): Paired observations and targets, n >= 2.
        ratio (float): Bernoulli parameter r of the labels.
        rng (numpy.random.Generator): Source of randomness.

    Returns:
        ContrastDataset: N = floor(n / 2) independent samples.
    """
    ratio = check_ratio(ratio)
    if dataset.n < 2:
        raise ConstructionError("dataset too small for i.i.d. construction")
    size = dataset.n // 2
    labels = _bernoulli(rng, size, ratio)
    rows = np.arange(size)
    return _assemble(dataset.X, dataset.Y, rows, np.where(labels == 1, rows, rows + size), labels)


def build_iid_additional(
    dataset: SupervisedDataset, extra: MarginalDatasets, ratio: float, rng
) -> ContrastDataset:
    """Build an i.i.d. contrast dataset that also spends the marginal pools.

    Source rows are split in order: the first 2 * N_XY rows feed the plain i.i.d. construction, the
    next N_Y rows may swap their target for an additional target, the next N_X rows may swap their
    observation for an additional observation. The three parts are stacked substituted-X first,
    then substituted-Y, then the plain part.

    Args:
        dataset (SupervisedDataset): Paired observations and targets.
        extra (MarginalDatasets): Additional observations and targets, possibly empty.
        ratio (float): Bernoulli parameter r of the labels.
        rng (numpy.random.Generator): Source of randomness.

    Returns:
        ContrastDataset: N = N_X + N_Y + N_XY samples.
    """
    ratio = check_ratio(ratio)
    extra.check_widths(dataset)
    n = dataset.n
    n_x = min(n, extra.n_x)
    n_y = min(extra.n_y, n - n_x)
    n_xy = (n - n_x - n_y) // 2
    if n_x + n_y + n_xy == 0:
        raise ConstructionError("dataset too small for i.i.d. construction")

    x_table = np.vstack([dataset.X, extra.x_pool(dataset.p)])
    y_table = np.vstack([dataset.Y, extra.y_pool(dataset.k)])

    x_rows = np.arange(2 * n_xy + n_y, 2 * n_xy + n_y + n_x)
    x_labels = _bernoulli(rng, n_x, ratio)
    x_part = _assemble(x_table, y_table, np.where(x_labels == 1, x_rows, n + np.arange(n_x)), x_rows, x_labels)

    y_rows = np.arange(2 * n_xy, 2 * n_xy + n_y)
    y_labels = _bernoulli(rng, n_y, ratio)
    y_part = _assemble(x_table, y_table, y_rows, np.where(y_labels == 1, y_rows, n + np.arange(n_y)), y_labels)

    xy_rows = np.arange(n_xy)
    xy_labels = _bernoulli(rng, n_xy, ratio)
    xy_part = _assemble(
        x_table, y_table, xy_rows, np.where(xy_labels == 1, xy_rows, xy_rows + n_xy), xy_labels
    )
    return ContrastDataset.concatenate([x_part, y_part, xy_part])


def sample_ranks(pool, count, rng):
    """Draw ``count`` distinct integers from range(pool) uniformly, without materializing the range.

    Partial Fisher-Yates shuffle where only the displaced positions are stored.

    Args:
        pool (int): Size of the candidate range.
        count (int): Number of draws, at most ``pool``.
        rng (numpy.random.Generator): Source of randomness.

    Returns:
        numpy.ndarray: ``count`` distinct ranks in draw order.
    """
    if count > pool:
        raise ConstructionError(f"cannot draw {count} distinct candidates out of {pool}")
    draws = rng.random(count)
    displaced = {}
    picks = np.empty(count, dtype=np.int64)
    for position in range(count):
        target = min(position + int(draws[position] * (pool - position)), pool - 1)
        picks[position] = displaced.get(target, target)
        displaced[target] = displaced.get(position, position)
    return picks


def _decode_off_diagonal(ranks, n):
    """Map ranks of the row-major (j, k) grid without its diagonal to (j, k)."""
    ranks = np.asarray(ranks, dtype=np.int64)
    rows = ranks // (n - 1)
    cols = ranks % (n - 1)
    return rows, np.where(cols < rows, cols, cols + 1)


def _check_distinct(matrix, what):
    if np.unique(matrix, axis=0).shape[0] != matrix.shape[0]:
        raise ConstructionError(
            f"duplicate rows found in {what}: the i.d. constructions assume pairwise distinct rows"
        )


def _check_counts(n_joint, n_marg, joint_pool, marg_pool):
    if not 1 <= n_joint <= joint_pool:
        raise ConstructionError(f"n_joint must be between 1 and {joint_pool}, got {n_joint}")
    if not 1 <= n_marg <= marg_pool:
        raise ConstructionError(f"n_marg must be between 1 and {marg_pool}, got {n_marg}")


def _finish_id(x_table, y_table, joint_origins, marg_origins, rng):
    """Stack matched then mismatched rows and shuffle them uniformly."""
    joint_x, joint_y = joint_origins
    marg_x, marg_y = marg_origins
    labels = np.concatenate([np.ones(len(joint_x), dtype=np.int64), np.zeros(len(marg_x), dtype=np.int64)])
    x_origin = np.concatenate([joint_x, marg_x])
    y_origin = np.concatenate([joint_y, marg_y])
    order = rng.permutation(len(labels))
    return _assemble(x_table, y_table, x_origin[order], y_origin[order], labels[order])


def mismatched_pool_size(n, n_x=0, n_y=0, m=1):
    """Number of distinct mismatched candidates for the i.d. constructions.

    Example:
        >>> mismatched_pool_size(2, n_x=1)
        4
    """
    return ((n + n_x) * (n + n_y) - n) * m


def build_id(dataset: SupervisedDataset, n_joint: int, n_marg: int, rng) -> ContrastDataset:
    """Build the identically distributed contrast dataset from the n x n grid of candidate pairs.

    Candidate (j, k) pairs observation j with target k and is matched when j == k. ``n_joint``
    matched and ``n_marg`` mismatched candidates are drawn without replacement, then shuffled.

    Args:
        dataset (SupervisedDataset): Paired observations and targets with pairwise distinct rows.
        n_joint (int): Number of matched samples, 1 <= n_joint <= n.
        n_marg (int): Number of mismatched samples, 1 <= n_marg <= n (n - 1).
        rng (numpy.random.Generator): Source of randomness.

    Returns:
        ContrastDataset: Exactly n_joint + n_marg samples.
    """
    return build_id_additional(dataset, MarginalDatasets(), n_joint, n_marg, rng)


def build_id_additional(
    dataset: SupervisedDataset, extra: MarginalDatasets, n_joint: int, n_marg: int, rng
) -> ContrastDataset:
    """Build an identically distributed contrast dataset whose mismatched pool includes the marginal pools.

    The mismatched candidates are enumerated in four consecutive segments:
    source pairs (j, k) with j != k, additional observation k with source target j,
    source observation j with additional target k, additional observation j with additional target k.

    Args:
        dataset (SupervisedDataset): Paired observations and targets.
        extra (MarginalDatasets): Additional observations and targets, possibly empty.
        n_joint (int): Number of matched samples, 1 <= n_joint <= n.
        n_marg (int): Number of mismatched samples, at most (n + n_x)(n + n_y) - n.
        rng (numpy.random.Generator): Source of randomness.

    Returns:
        ContrastDataset: Exactly n_joint + n_marg samples.
    """
    extra.check_widths(dataset)
    n, n_x, n_y = dataset.n, extra.n_x, extra.n_y
    _check_counts(n_joint, n_marg, n, mismatched_pool_size(n, n_x, n_y))
    x_table = np.vstack([dataset.X, extra.x_pool(dataset.p)])
    y_table = np.vstack([dataset.Y, extra.y_pool(dataset.k)])
    _check_distinct(x_table, "X")
    _check_distinct(y_table, "Y")

    joint = sample_ranks(n, n_joint, rng)
    ranks = sample_ranks(mismatched_pool_size(n, n_x, n_y), n_marg, rng)

    sizes = [n * (n - 1), n * n_x, n * n_y, n_x * n_y]
    offsets = np.cumsum([0] + sizes)
    segment = np.searchsorted(offsets, ranks, side="right") - 1
    local = ranks - offsets[segment]
    marg_x = np.empty(n_marg, dtype=np.int64)
    marg_y = np.empty(n_marg, dtype=np.int64)

    mask = segment == 0
    if mask.any():
        marg_x[mask], marg_y[mask] = _decode_off_diagonal(local[mask], n)
    mask = segment == 1
    if mask.any():
        marg_x[mask], marg_y[mask] = n + local[mask] % n_x, local[mask] // n_x
    mask = segment == 2
    if mask.any():
        marg_x[mask], marg_y[mask] = local[mask] // n_y, n + local[mask] % n_y
    mask = segment == 3
    if mask.any():
        marg_x[mask], marg_y[mask] = n + local[mask] // n_y, n + local[mask] % n_y

    return _finish_id(x_table, y_table, (joint, joint), (marg_x, marg_y), rng)


def build_id_multitarget(dataset: MultiTargetDataset, n_joint: int, n_marg: int, rng) -> ContrastDataset:
    """Build an identically distributed contrast dataset from observations carrying m targets each.

    Candidate ((j n + k) m + l) pairs observation j with the l-th target of observation k and is
    matched when j == k. ``y_origin`` indexes the row-major flattened target matrix, k m + l. With
    m = 1 the result is identical to :func:`build_id`.

    Args:
        dataset (MultiTargetDataset): Observations with m targets each.
        n_joint (int): Number of matched samples, 1 <= n_joint <= n m.
        n_marg (int): Number of mismatched samples, 1 <= n_marg <= n (n - 1) m.
        rng (numpy.random.Generator): Source of randomness.

    Returns:
        ContrastDataset: Exactly n_joint + n_marg samples of width p + 1.
    """
    n, m = dataset.n, dataset.m
    _check_counts(n_joint, n_marg, n * m, mismatched_pool_size(n, m=m))
    y_table = dataset.target_values().reshape(-1, 1)
    _check_distinct(dataset.X, "X")
    _check_distinct(y_table, "Y")

    joint = sample_ranks(n * m, n_joint, rng)
    joint_x = joint // m
    joint_y = joint_x * m + joint % m

    ranks = sample_ranks(mismatched_pool_size(n, m=m), n_marg, rng)
    marg_x, marg_k = _decode_off_diagonal(ranks // m, n)
    marg_y = marg_k * m + ranks % m
    return _finish_id(dataset.X, y_table, (joint_x, joint_y), (marg_x, marg_y), rng)


def ratio_to_counts(n_available_joint: int, ratio: float, cap_marg: int):
    """Derive (n_joint, n_marg) so that the contrast dataset has N = floor(n_joint / r) samples.

    Args:
        n_available_joint (int): Number of matched candidates, all of them are used.
        ratio (float): Target ratio r.
        cap_marg (int): Size of the mismatched pool.

    Returns:
        tuple: (n_joint, n_marg).

    Example:
        >>> ratio_to_counts(100, 0.05, 9900)
        (100, 1900)
        >>> ratio_to_counts(1000, 0.15, 999000)
        (1000, 5666)
    """
    ratio = check_ratio(ratio)
    if n_available_joint < 1 or cap_marg < 1:
        raise ConstructionError("ratio_to_counts needs at least one matched and one mismatched candidate")
    n_joint = int(n_available_joint)
    total = math.floor(n_joint / ratio + 1e-9)
    n_marg = min(int(cap_marg), total - n_joint)
    if n_marg < 1:
        raise ConstructionError(f"ratio {ratio} leaves no mismatched sample for {n_joint} matched samples")
    return n_joint, n_marg

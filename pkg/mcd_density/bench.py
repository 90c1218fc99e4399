"""Benchmark runners: synthetic density models, CSV datasets and construction ablations.

Each benchmark cell draws from its own random substream, derived from the cell seed and the cell
position, so serial and parallel runs produce identical reports.
"""
import math
import os
import time
from typing import List, Optional

import numpy as np
from joblib import Parallel, delayed

from mcd_density.config import AblationCell, ExperimentConfig
from mcd_density.datasets import MarginalDatasets, ingest_csv
from mcd_density.density_models import get_density_model
from mcd_density.estimator import MarginalBaseline, McdConfig, McdEstimator, rescale
from mcd_density.exceptions import DatasetError, IncompatibleConstruction
from mcd_density.metrics import empirical_kl, empirical_nll
from mcd_density.reports import EvaluationReport
from mcd_density.utils import substream, warn

PILOT_QUANTILES = (0.0005, 0.9995)
SPLIT_CAP = 300
SPLIT_FRACTION = 0.8

ABLATION_PRESETS = {
    "ratio": [AblationCell(construction="iid", ratio=ratio) for ratio in (0.05, 0.15, 0.5, 0.85)]
    + [AblationCell(construction="id", ratio=ratio) for ratio in (0.01, 0.015, 0.05, 0.15, 0.5)],
    "marginal": [
        AblationCell(construction="iid", ratio=0.5),
        AblationCell(construction="iid_additional", ratio=0.5, n_x=100),
        AblationCell(construction="iid_additional", ratio=0.5, n_y=100),
        AblationCell(construction="iid_additional", ratio=0.5, n_x=25, n_y=25),
        AblationCell(construction="id", ratio=0.05),
        AblationCell(construction="id_additional", ratio=0.05, n_x=500),
        AblationCell(construction="id_additional", ratio=0.05, n_y=500),
        AblationCell(construction="id_additional", ratio=0.05, n_x=150, n_y=150),
    ],
    "multitarget": [AblationCell(construction="id", ratio=ratio) for ratio in (0.5, 0.15, 0.05)]
    + [
        AblationCell(construction="id_multitarget", ratio=ratio, m=m)
        for m in (2, 10)
        for ratio in (0.5, 0.15, 0.05)
    ],
}


def split_paper(n_max, seed):
    """Shuffle range(n_max) and split it into disjoint train and test indices.

    The train set holds min(300, floor(0.8 n_max)) indices, the test set min(300, n_max - n).

    Args:
        n_max (int): Number of available rows, at least 2.
        seed (int): Seed of the shuffle.

    Returns:
        tuple: (train indices, test indices).
    """
    if n_max < 2:
        raise DatasetError(f"at least 2 rows are needed to split a dataset, got {n_max}")
    n_train = min(SPLIT_CAP, math.floor(SPLIT_FRACTION * n_max))
    n_test = min(SPLIT_CAP, n_max - n_train)
    order = np.random.default_rng(seed).permutation(n_max)
    return order[:n_train], order[n_train : n_train + n_test]


def pilot_grid(model, points, rng, pilot_size=100_000):
    """Evenly spaced grid between the 0.0005 and 0.9995 quantiles of a pilot sample of the model's targets."""
    pilot = model.sample_targets(model.sample_features(pilot_size, rng), rng)
    low, high = np.quantile(pilot, PILOT_QUANTILES)
    return np.linspace(low, high, int(points))


def seeds_of(config: ExperimentConfig, repetitions):
    """Seeds of the repetitions: seed, seed + 1, ..."""
    return [config.seed + index for index in range(repetitions)]


def _mcd_config(config: ExperimentConfig, kind, seed, **updates) -> McdConfig:
    discriminator = config.mcd.discriminator.model_copy(update={"kind": kind})
    return config.mcd.model_copy(update={"discriminator": discriminator, "seed": seed, **updates})


def _fit_and_predict(estimator, dataset, extra, features, grid, rescaled, timing):
    start = time.perf_counter()
    estimator.fit_dataset(dataset, extra)
    predicted = estimator.pdf_from_X(features, grid)
    if rescaled:
        predicted = rescale(predicted, grid)
    elapsed = time.perf_counter() - start
    return predicted, (elapsed if timing else 0.0)


def _map(function, tasks, workers):
    if workers > 1 and len(tasks) > 1:
        return Parallel(n_jobs=workers)(delayed(function)(task) for task in tasks)
    return [function(task) for task in tasks]


def _density_cell(task) -> List[EvaluationReport]:
    config, model_index, model_name, seed = task
    settings = config.density
    params = {"feature_dim": settings.feature_dim, "seed": seed, **settings.model_params.get(model_name, {})}
    model = get_density_model(model_name, **params)
    rng = substream(seed, model_index)
    train_set = model.sample(config.n_train, rng)
    features = model.sample_features(config.n_test, rng)
    grid = pilot_grid(model, config.grid_points, rng, settings.pilot_size)
    truth = model.conditional_pdf_matrix(features, grid)

    common = {"model": model.name, "metric": "KL", "n_test": config.n_test, "grid_size": grid.size, "seed": seed}
    reports = []
    for kind in settings.discriminators:
        estimator = McdEstimator(_mcd_config(config, kind, seed))
        predicted, elapsed = _fit_and_predict(
            estimator, train_set, None, features, grid, config.rescale, config.record_timing
        )
        value = empirical_kl(truth, predicted, normalize=settings.normalize_kl)
        reports.append(
            EvaluationReport(
                method=estimator.name,
                value=value,
                wall_time_seconds=elapsed,
                contrast_size=estimator.contrast_size,
                ratio=estimator.ratio,
                construction=estimator.construction,
                **common,
            )
        )
    baseline = MarginalBaseline()
    predicted, elapsed = _fit_and_predict(baseline, train_set, None, features, grid, config.rescale, config.record_timing)
    reports.append(
        EvaluationReport(
            method=baseline.name,
            value=empirical_kl(truth, predicted, normalize=settings.normalize_kl),
            wall_time_seconds=elapsed,
            **common,
        )
    )
    return reports


def run_density_bench(config: ExperimentConfig) -> List[EvaluationReport]:
    """Score every method on every configured density model with the KL functional.

    Args:
        config (ExperimentConfig): Loaded settings.

    Returns:
        list: EvaluationReport objects ordered by model, seed, then method.
    """
    settings = config.density
    for name in settings.models:
        get_density_model(name, **{"feature_dim": settings.feature_dim, **settings.model_params.get(name, {})})
    tasks = [
        (config, model_index, name, seed)
        for model_index, name in enumerate(settings.models)
        for seed in seeds_of(config, settings.repetitions)
    ]
    return [report for reports in _map(_density_cell, tasks, config.workers) for report in reports]


def run_real_bench(config: ExperimentConfig, path: Optional[str] = None) -> List[EvaluationReport]:
    """Score every method on a CSV dataset with the NLL functional at held-out pairs.

    Args:
        config (ExperimentConfig): Loaded settings.
        path (str, optional): CSV file, defaults to ``config.real.path``.

    Returns:
        list: One EvaluationReport per (seed, method).
    """
    settings = config.real
    path = path or settings.path
    if not path:
        raise DatasetError("no CSV dataset given for the real data benchmark")
    dataset, _ = ingest_csv(path, settings.target_column)
    name = os.path.splitext(os.path.basename(path))[0]
    if dataset.n > 2 * SPLIT_CAP:
        warn(f"{name} has {dataset.n} rows, each repetition uses {2 * SPLIT_CAP} of them")
    reports = []
    for seed in seeds_of(config, settings.repetitions):
        train_idx, test_idx = split_paper(dataset.n, seed)
        train_set, test_set = dataset.subset(train_idx), dataset.subset(test_idx)
        estimators = [McdEstimator(_mcd_config(config, kind, seed)) for kind in settings.discriminators]
        for estimator in estimators + [MarginalBaseline()]:
            start = time.perf_counter()
            estimator.fit_dataset(train_set)
            value = empirical_nll(estimator.pdf(test_set.X, test_set.target_values()))
            elapsed = time.perf_counter() - start if config.record_timing else 0.0
            reports.append(
                EvaluationReport(
                    method=estimator.name,
                    model=name,
                    metric="NLL",
                    value=value,
                    n_test=test_set.n,
                    seed=seed,
                    wall_time_seconds=elapsed,
                    contrast_size=getattr(estimator, "contrast_size", None),
                    ratio=getattr(estimator, "ratio", None),
                    construction=getattr(estimator, "construction", None),
                )
            )
    return reports


def check_cell(cell: AblationCell):
    """Reject cells whose construction does not match the data they describe."""
    multitarget = cell.construction == "id_multitarget"
    if multitarget and cell.m is None:
        raise IncompatibleConstruction("id_multitarget cells need the number of targets per observation m")
    if not multitarget and cell.m not in (None, 1):
        raise IncompatibleConstruction(f"{cell.construction} cells cannot use m = {cell.m}")
    if not cell.construction.endswith("_additional") and (cell.n_x or cell.n_y):
        raise IncompatibleConstruction(f"{cell.construction} cells cannot use additional marginal data")


def ablation_cells(config: ExperimentConfig) -> List[AblationCell]:
    """Explicit cells when configured, the preset grid otherwise."""
    cells = config.ablation.cells or ABLATION_PRESETS[config.ablation.preset]
    for cell in cells:
        check_cell(cell)
    return list(cells)


def _ablation_cell(task) -> EvaluationReport:
    config, cell_index, cell, seed = task
    settings = config.ablation
    params = {"feature_dim": settings.feature_dim, "seed": seed, **settings.model_params}
    model = get_density_model(settings.model, **params)
    rng = substream(seed, cell_index)
    if cell.construction == "id_multitarget":
        train_set = model.sample_multi(config.n_train, cell.m, rng)
    else:
        train_set = model.sample(config.n_train, rng)
    extra = None
    if cell.construction.endswith("_additional"):
        extra_y = model.sample_targets(model.sample_features(cell.n_y, rng), rng) if cell.n_y else None
        extra = MarginalDatasets(extra_x=model.sample_features(cell.n_x, rng) if cell.n_x else None, extra_y=extra_y)
    features = model.sample_features(config.n_test, rng)
    grid = pilot_grid(model, config.grid_points, rng, config.density.pilot_size)
    truth = model.conditional_pdf_matrix(features, grid)

    kind = config.mcd.discriminator.kind
    estimator = McdEstimator(_mcd_config(config, kind, seed, construction=cell.construction, ratio=cell.ratio))
    predicted, elapsed = _fit_and_predict(
        estimator, train_set, extra, features, grid, config.rescale, config.record_timing
    )
    return EvaluationReport(
        method=estimator.name,
        model=model.name,
        metric="KL",
        value=empirical_kl(truth, predicted, normalize=config.density.normalize_kl),
        n_test=config.n_test,
        grid_size=grid.size,
        seed=seed,
        wall_time_seconds=elapsed,
        contrast_size=estimator.contrast_size,
        ratio=cell.ratio,
        construction=cell.construction,
        n_x=cell.n_x,
        n_y=cell.n_y,
        m=cell.m if cell.m is not None else 1,
    )


def run_ablation(config: ExperimentConfig) -> List[EvaluationReport]:
    """Score the contrastive estimator on every ablation cell.

    Args:
        config (ExperimentConfig): Loaded settings.

    Returns:
        list: One EvaluationReport per (cell, seed), ordered by cell then seed.
    """
    get_density_model(config.ablation.model, feature_dim=config.ablation.feature_dim, **config.ablation.model_params)
    tasks = [
        (config, cell_index, cell, seed)
        for cell_index, cell in enumerate(ablation_cells(config))
        for seed in seeds_of(config, config.ablation.repetitions)
    ]
    return _map(_ablation_cell, tasks, config.workers)

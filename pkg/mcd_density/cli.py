"""main cli commands."""
import sys

import click
import numpy as np
from pydantic import ValidationError
from termcolor import colored

from mcd_density import bench, config
from mcd_density.datasets import CsvDataset, Standardization, write_csv
from mcd_density.density_models import DENSITY_MODELS, get_density_model
from mcd_density.estimator import McdEstimator, train
from mcd_density.exceptions import DatasetError, McdError
from mcd_density.reports import emit_tables, print_table
from mcd_density.utils import MutuallyExclusiveOption, error, info, substream

DEFAULT_PREDICT_GRID = 100


@click.group()
def main():
    """MCD DENSITY.

    This tool estimates the conditional density of a continuous target given a vector of features
    by training a classifier to tell matched (observation, target) pairs from mismatched ones. It
    can simulate data from reference density models, train and apply estimators on CSV files and
    run the benchmarks and ablations of the method.
    """


def _load_settings(config_file, **overrides):
    """Load settings from the config file and the environment, then apply the CLI flags that were given."""
    settings = config.load_and_exit(config_file or "pyproject.toml")
    updates = {key: value for key, value in overrides.items() if value is not None}
    if updates:
        settings = settings.model_copy(update=updates)
        config.SETTINGS = settings
    return settings


def _fail(exc):
    if isinstance(exc, ValidationError):
        error(f"invalid input, found {len(exc.errors())} error(s)")
        for item in exc.errors():
            print(f"  {'/'.join(str(loc) for loc in item['loc'])} | {item['msg']}")
    else:
        error(str(exc))
    sys.exit(1)


@main.command()
@click.option("--model", "model_name", required=True, help="Name of the density model to sample from.")
@click.option("--n", "n_rows", default=100, show_default=True, type=click.IntRange(min=1), help="Number of rows.")
@click.option("--feature-dim", default=1, show_default=True, type=click.IntRange(min=1), help="Number of features.")
@click.option(
    "--targets",
    default=1,
    show_default=True,
    type=click.IntRange(min=1),
    help="Number of conditionally independent targets drawn per row.",
)
@click.option("--seed", default=None, type=int, help="Seed of the draw, overrides the config file.")
@click.option("--config", "config_file", default=None, help="pyproject.toml holding a [tool.mcd_density] table.")
@click.option("--out", required=True, help="CSV file to write.")
def simulate(model_name, n_rows, feature_dim, targets, seed, config_file, out):  # noqa: D301
    """Sample a CSV dataset from a reference density model.

    The file holds the feature columns x0, x1, ... followed by the target column y, or y0, y1, ...
    when several targets are drawn per row.
    \f

    Args:
        model_name (str): Registry key or display name of the density model.
        n_rows (int): Number of rows.
        feature_dim (int): Number of features.
        targets (int): Number of targets per row.
        seed (int, None): Seed of the draw.
        config_file (str, None): Configuration file.
        out (str): Output CSV file.
    """
    settings = _load_settings(config_file, seed=seed)
    try:
        params = settings.density.model_params.get(model_name, {})
        model = get_density_model(model_name, **{"feature_dim": feature_dim, "seed": settings.seed, **params})
        rng = substream(settings.seed, 0)
        if targets == 1:
            dataset = model.sample(n_rows, rng)
            target_names = ["y"]
        else:
            dataset = model.sample_multi(n_rows, targets, rng)
            target_names = [f"y{index}" for index in range(targets)]
        header = [f"x{index}" for index in range(dataset.p)] + target_names
        write_csv(out, header, np.hstack([dataset.X, dataset.Y]).tolist())
    except (McdError, ValidationError) as exc:
        _fail(exc)
    info(f"wrote {n_rows} rows sampled from {model.name} to {out}")


@main.command(name="train")
@click.argument("data", type=click.Path())
@click.option(
    "--target-column", default="-1", show_default=True, help="Name or position of the target column in the CSV file."
)
@click.option("--seed", default=None, type=int, help="Seed of the fit, overrides the config file.")
@click.option("--config", "config_file", default=None, help="pyproject.toml holding a [tool.mcd_density] table.")
@click.option("--out", default="model.yml", show_default=True, help="Model file to write.")
def train_command(data, target_column, seed, config_file, out):  # noqa: D301
    """Fit a contrastive estimator on a CSV dataset.

    Every column is standardized before the fit; the record needed to map new data into the same
    units is saved along with the model.
    \f

    Args:
        data (str): CSV file with one header row.
        target_column (str): Name or position of the target column.
        seed (int, None): Seed of the fit.
        config_file (str, None): Configuration file.
        out (str): Model file to write.
    """
    settings = _load_settings(config_file, seed=seed)
    try:
        table = CsvDataset.read(data)
        target = table.column_index(target_column)
        dataset, record = table.to_supervised(target)
        cfg = settings.mcd.model_copy(update={"seed": settings.seed})
        estimator = train(dataset, None, cfg)
        features = [name for index, name in enumerate(table.header) if index != target]
        estimator.save(
            out,
            metadata={
                "header": table.header,
                "features": features,
                "target": table.header[target],
                "mean": record.mean,
                "scale": record.scale,
            },
        )
    except (McdError, ValidationError) as exc:
        _fail(exc)
    info(f"trained {estimator.name} on {dataset.n} rows, contrast dataset of {estimator.contrast_size} samples")
    print(colored(f"Model written to {out}", "green"))


def _column_record(metadata, names):
    """Standardization record of the named columns, taken from the record saved at training time."""
    try:
        header = metadata["header"]
        positions = [header.index(name) for name in names]
        return Standardization(
            mean=[metadata["mean"][pos] for pos in positions], scale=[metadata["scale"][pos] for pos in positions]
        )
    except (KeyError, ValueError) as exc:
        raise DatasetError(f"column {exc} is not described by the model file") from exc


@main.command()
@click.argument("model_file", type=click.Path())
@click.argument("data", type=click.Path())
@click.option(
    "--target-column",
    default=None,
    cls=MutuallyExclusiveOption,
    mutually_exclusive=["grid_points"],
    help="Column of target values; the density is evaluated at each (row, target) pair.",
)
@click.option(
    "--grid-points",
    default=None,
    type=click.IntRange(min=2),
    cls=MutuallyExclusiveOption,
    mutually_exclusive=["target_column"],
    help=f"Size of the target grid the density is evaluated on for each row [default: {DEFAULT_PREDICT_GRID}].",
)
@click.option("--out", required=True, help="CSV file to write.")
def predict(model_file, data, target_column, grid_points, out):  # noqa: D301
    """Evaluate a trained estimator on the rows of a CSV file.

    With --target-column, one density value is written per row. Otherwise the density of each row
    is written on an evenly spaced grid covering the bulk of the target distribution, in long format
    (row, y, pdf). Densities are reported in the units of the original target.
    \f

    Args:
        model_file (str): Model file written by the train command.
        data (str): CSV file holding at least the feature columns used for training.
        target_column (str, None): Column of target values.
        grid_points (int, None): Size of the target grid.
        out (str): Output CSV file.
    """
    try:
        estimator = McdEstimator.load(model_file)
        metadata = estimator.metadata
        table = CsvDataset.read(data, min_columns=1)
        features = metadata.get("features", [])
        missing = [name for name in features if name not in table.header]
        if missing:
            raise DatasetError(f"{data} lacks the feature columns {missing}")
        X = _column_record(metadata, features).transform(
            table.values[:, [table.header.index(name) for name in features]]
        )
        target_record = _column_record(metadata, [metadata.get("target")])
        y_scale = target_record.scale[0]

        if target_column is not None:
            raw_y = table.values[:, table.column_index(target_column)]
            density = estimator.pdf(X, target_record.transform(raw_y.reshape(-1, 1)).ravel()) / y_scale
            header = ["row", "y", "pdf"]
            rows = [[index, raw_y[index], density[index]] for index in range(table.values.shape[0])]
        else:
            grid = estimator.default_grid(grid_points or DEFAULT_PREDICT_GRID)
            density = estimator.pdf_from_X(X, grid) / y_scale
            raw_grid = target_record.inverse_transform(grid.reshape(-1, 1)).ravel()
            header = ["row", "y", "pdf"]
            rows = [
                [index, raw_grid[column], density[index, column]]
                for index in range(density.shape[0])
                for column in range(grid.size)
            ]
        write_csv(out, header, rows)
    except (McdError, ValidationError) as exc:
        _fail(exc)
    info(f"wrote {len(rows)} density values to {out}")


def _bench_options(function):
    """Options shared by the benchmark commands."""
    options = [
        click.option("--config", "config_file", default=None, help="pyproject.toml holding a [tool.mcd_density] table."),
        click.option("--seed", default=None, type=int, help="Seed of the first repetition."),
        click.option("--out", "output", default=None, help="Write the reports to this file."),
        click.option("--format", "fmt", default=None, type=click.Choice(["csv", "markdown"]), help="Format of --out."),
        click.option(
            "--rescale/--no-rescale", default=None, help="Renormalize predicted densities on the grid before scoring."
        ),
        click.option("--grid-points", default=None, type=click.IntRange(min=2), help="Size of the evaluation grid."),
        click.option("--timing/--no-timing", "record_timing", default=None, help="Record fit and predict wall time."),
        click.option("--workers", default=None, type=click.IntRange(min=1), help="Number of worker processes."),
    ]
    for option in reversed(options):
        function = option(function)
    return function


def _report(reports, settings):
    for report in reports:
        report.print()
    print_table(reports)
    if settings.output:
        emit_tables(reports, settings.output, settings.format)
        print(colored(f"Reports written to {settings.output}", "green"))


def _run_bench(runner, config_file, fmt, **overrides):
    settings = _load_settings(config_file, format=fmt, **overrides)
    try:
        reports = runner(settings)
        _report(reports, settings)
    except (McdError, ValidationError) as exc:
        _fail(exc)


@main.command(name="bench-density")
@_bench_options
def bench_density(config_file, fmt, **overrides):  # noqa: D301
    """Score the estimators against the true conditional densities of the synthetic models.

    Models, discriminators and repetitions come from the [tool.mcd_density.density] table.
    \f
    """
    _run_bench(bench.run_density_bench, config_file, fmt, **overrides)


@main.command(name="bench-real")
@click.argument("data", required=False, type=click.Path())
@_bench_options
def bench_real(data, config_file, fmt, **overrides):  # noqa: D301
    """Score the estimators by held-out negative log-likelihood on a CSV dataset.

    DATA defaults to the path of the [tool.mcd_density.real] table.
    \f
    """
    _run_bench(lambda settings: bench.run_real_bench(settings, data), config_file, fmt, **overrides)


@main.command()
@click.option(
    "--preset",
    default=None,
    type=click.Choice(sorted(bench.ABLATION_PRESETS)),
    help="Grid of cells to run when no explicit cells are configured.",
)
@_bench_options
def ablation(preset, config_file, fmt, **overrides):  # noqa: D301
    """Compare contrast constructions, ratios and amounts of additional marginal data.

    \f
    """

    def runner(settings):
        if preset:
            settings = settings.model_copy(update={"ablation": settings.ablation.model_copy(update={"preset": preset})})
        return bench.run_ablation(settings)

    _run_bench(runner, config_file, fmt, **overrides)


@main.command(name="models")
def list_models():
    """List the available density models."""
    for key, cls in sorted(DENSITY_MODELS.items()):
        print(f"{key:20} {cls.name}")

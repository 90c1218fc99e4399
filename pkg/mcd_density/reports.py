"""Evaluation reports and result tables."""
import csv
import math
import statistics
from typing import List, Literal, Optional, Sequence

from pydantic import BaseModel, ConfigDict, field_validator  # pylint: disable=no-name-in-module
from rich.console import Console
from rich.table import Table
from termcolor import colored

from mcd_density.datasets import format_number, write_csv
from mcd_density.exceptions import ReportWriteError

# Column name in the tables, report attribute
COLUMNS = [
    ("method", "method"),
    ("model", "model"),
    ("metric", "metric"),
    ("value", "value"),
    ("N", "contrast_size"),
    ("r", "ratio"),
    ("seed", "seed"),
    ("wall_time", "wall_time_seconds"),
    ("n_test", "n_test"),
    ("grid_size", "grid_size"),
    ("construction", "construction"),
    ("n_x", "n_x"),
    ("n_y", "n_y"),
    ("m", "m"),
]


class EvaluationReport(BaseModel):
    """Score of one method on one model or dataset for one seed.

    Realized contrast size and ratio are recorded so that any cell can be re-run on its own.
    """

    model_config = ConfigDict(extra="forbid")

    method: str
    model: str
    metric: Literal["KL", "NLL"]
    value: float
    n_test: int
    grid_size: int = 0
    seed: int
    wall_time_seconds: float = 0.0
    contrast_size: Optional[int] = None
    ratio: Optional[float] = None
    construction: Optional[str] = None
    n_x: Optional[int] = None
    n_y: Optional[int] = None
    m: Optional[int] = None

    @field_validator("value")
    def value_must_be_finite(cls, var):  # pylint: disable=no-self-argument
        """Validate that the metric value is finite."""
        if not math.isfinite(var):
            raise ValueError("metric value must be finite")
        return var

    def row(self):
        """Values in table column order."""
        return [getattr(self, attribute) for _, attribute in COLUMNS]

    def print(self):
        """Print the report in CLI."""
        msg = f"{colored(self.metric, 'green')} | [METHOD] {self.method} [MODEL] {self.model} [VALUE] {self.value:.6g}"
        if self.contrast_size is not None:
            msg += f" [N] {self.contrast_size}"
        msg += f" [SEED] {self.seed}"
        print(msg)


def _check_nonempty(reports):
    if not reports:
        raise ReportWriteError("no reports to write")


def _markdown_table(header, rows):
    lines = ["| " + " | ".join(header) + " |", "|" + "|".join(["---"] * len(header)) + "|"]
    lines.extend("| " + " | ".join(row) + " |" for row in rows)
    return lines


# Row labels of the median tables; ablation cells are told apart by their setting
ROW_COLUMNS = ["model"]
ABLATION_ROW_COLUMNS = ["model", "construction", "r", "N", "n_x", "n_y", "m"]


def _row_key(report):
    if report.m is None:
        return (report.model,)
    return (report.model, report.construction, report.ratio, report.contrast_size, report.n_x, report.n_y, report.m)


def median_pivot(reports: Sequence[EvaluationReport]):
    """Median value per (metric, row, method), in first-seen order.

    A row is a model, or for ablation reports a model together with the construction, ratio,
    contrast size, n_x, n_y and m of the cell.

    Returns:
        dict: metric -> (row header, rows, methods, {(row, method): median}).
    """
    pivots = {}
    for report in reports:
        rows, methods, cells = pivots.setdefault(report.metric, ([], [], {}))
        row = _row_key(report)
        if row not in rows:
            rows.append(row)
        if report.method not in methods:
            methods.append(report.method)
        cells.setdefault((row, report.method), []).append(report.value)
    result = {}
    for metric, (rows, methods, cells) in pivots.items():
        header = ABLATION_ROW_COLUMNS if any(len(row) > 1 for row in rows) else ROW_COLUMNS
        result[metric] = (
            header,
            rows,
            methods,
            {key: statistics.median(values) for key, values in cells.items()},
        )
    return result


def _row_labels(row, width):
    labels = ["" if value is None else f"{value:g}" if isinstance(value, float) else str(value) for value in row]
    return labels + [""] * (width - len(row))


def render_markdown(reports: Sequence[EvaluationReport]) -> str:
    """Full table of reports followed by one table of medians per metric, one column per method."""
    _check_nonempty(reports)
    header = [name for name, _ in COLUMNS]
    lines = _markdown_table(header, [[format_number(value) for value in report.row()] for report in reports])
    for metric, (row_header, rows, methods, cells) in median_pivot(reports).items():
        lines.extend(["", f"Median {metric}", ""])
        table = [
            _row_labels(row, len(row_header))
            + [format_number(cells[(row, method)]) if (row, method) in cells else "" for method in methods]
            for row in rows
        ]
        lines.extend(_markdown_table(row_header + methods, table))
    return "\n".join(lines) + "\n"


def emit_tables(reports: Sequence[EvaluationReport], path, fmt="csv"):
    """Write reports to ``path`` as CSV or markdown.

    Args:
        reports (list): EvaluationReport objects, at least one.
        path (str): Output file.
        fmt (str): ``csv`` or ``markdown``.
    """
    _check_nonempty(reports)
    try:
        if fmt == "csv":
            write_csv(path, [name for name, _ in COLUMNS], [report.row() for report in reports])
        elif fmt == "markdown":
            with open(path, "w", encoding="utf-8") as fileh:
                fileh.write(render_markdown(reports))
        else:
            raise ReportWriteError(f"unknown table format {fmt}, expected csv or markdown")
    except OSError as exc:
        if isinstance(exc, ReportWriteError):
            raise
        raise ReportWriteError(f"unable to write {path}: {exc}") from exc


def read_reports(path) -> List[EvaluationReport]:
    """Load reports written by :func:`emit_tables` in CSV format."""
    reports = []
    with open(path, newline="", encoding="utf-8") as fileh:
        for record in csv.DictReader(fileh):
            fields = {attribute: record[name] for name, attribute in COLUMNS if record.get(name, "") != ""}
            reports.append(EvaluationReport(**fields))
    return reports


def print_table(reports: Sequence[EvaluationReport], console: Optional[Console] = None):
    """Render the median pivot of the reports on the console."""
    console = console or Console()
    for metric, (row_header, rows, methods, cells) in median_pivot(reports).items():
        table = Table(title=f"Median {metric}")
        for name in row_header:
            table.add_column(name)
        for method in methods:
            table.add_column(method, justify="right")
        for row in rows:
            values = [f"{cells[(row, method)]:.4g}" if (row, method) in cells else "" for method in methods]
            table.add_row(*_row_labels(row, len(row_header)), *values)
        console.print(table)

"""Dataset containers, standardization record and CSV ingestion."""
# pylint: disable=no-self-argument
import csv
import math
import os
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from mcd_density.exceptions import DatasetError

_ARRAYS = ConfigDict(arbitrary_types_allowed=True, frozen=True)


def _as_matrix(value, name, allow_empty=False):
    """Coerce a 1-D or 2-D array-like into a 2-D float matrix."""
    matrix = np.asarray(value, dtype=float)
    if matrix.ndim == 1:
        matrix = matrix.reshape(-1, 1)
    if matrix.ndim != 2:
        raise DatasetError(f"{name} must be a 1-D or 2-D array, got {matrix.ndim} dimensions")
    if not allow_empty and matrix.shape[0] < 1:
        raise DatasetError(f"{name} must hold at least one row")
    if np.isnan(matrix).any():
        raise DatasetError(f"{name} contains NaN entries")
    return matrix


class SupervisedDataset(BaseModel):
    """Feature matrix X (n x p) paired row by row with the target matrix Y (n x k)."""

    model_config = _ARRAYS

    X: np.ndarray
    Y: np.ndarray

    @field_validator("X", "Y", mode="before")
    def _matrix(cls, value, info):
        return _as_matrix(value, info.field_name)

    @model_validator(mode="after")
    def _rows_match(self):
        if self.X.shape[0] != self.Y.shape[0]:
            raise DatasetError(f"X has {self.X.shape[0]} rows but Y has {self.Y.shape[0]}")
        return self

    @property
    def n(self):
        """Number of observations."""
        return self.X.shape[0]

    @property
    def p(self):
        """Number of features."""
        return self.X.shape[1]

    @property
    def k(self):
        """Number of target columns."""
        return self.Y.shape[1]

    def subset(self, indices):
        """Return the dataset restricted to ``indices`` (in the given order)."""
        indices = np.asarray(indices, dtype=int)
        return SupervisedDataset(X=self.X[indices], Y=self.Y[indices])

    def target_values(self):
        """All target values as a flat vector."""
        return self.Y.ravel()


class MultiTargetDataset(BaseModel):
    """Observations X (n x p) with m conditionally i.i.d. target draws per observation, Y (n x m)."""

    model_config = _ARRAYS

    X: np.ndarray
    Y: np.ndarray

    @field_validator("X", "Y", mode="before")
    def _matrix(cls, value, info):
        return _as_matrix(value, info.field_name)

    @model_validator(mode="after")
    def _rows_match(self):
        if self.X.shape[0] != self.Y.shape[0]:
            raise DatasetError(f"X has {self.X.shape[0]} rows but Y has {self.Y.shape[0]}")
        return self

    @property
    def n(self):
        """Number of observations."""
        return self.X.shape[0]

    @property
    def p(self):
        """Number of features."""
        return self.X.shape[1]

    @property
    def m(self):
        """Number of targets drawn per observation."""
        return self.Y.shape[1]

    def target_values(self):
        """All n * m target values as a flat vector, row-major."""
        return self.Y.ravel()


class MarginalDatasets(BaseModel):
    """Additional marginal samples: observations without target and targets without observation."""

    model_config = _ARRAYS

    extra_x: Optional[np.ndarray] = None
    extra_y: Optional[np.ndarray] = None

    @field_validator("extra_x", "extra_y", mode="before")
    def _matrix(cls, value, info):
        if value is None:
            return None
        return _as_matrix(value, info.field_name, allow_empty=True)

    @property
    def n_x(self):
        """Number of additional observations."""
        return 0 if self.extra_x is None else self.extra_x.shape[0]

    @property
    def n_y(self):
        """Number of additional target values."""
        return 0 if self.extra_y is None else self.extra_y.shape[0]

    def x_pool(self, width):
        """Additional observations as an (n_x, width) matrix, empty when absent."""
        if self.extra_x is None:
            return np.empty((0, width))
        return self.extra_x

    def y_pool(self, width):
        """Additional targets as an (n_y, width) matrix, empty when absent."""
        if self.extra_y is None:
            return np.empty((0, width))
        return self.extra_y

    def check_widths(self, dataset):
        """Ensure the marginal pools have the widths of ``dataset``.

        Args:
            dataset (SupervisedDataset): The paired supervised dataset.
        """
        if self.n_x and self.extra_x.shape[1] != dataset.p:
            raise DatasetError(f"extra_x has width {self.extra_x.shape[1]}, expected {dataset.p}")
        if self.n_y and self.extra_y.shape[1] != dataset.k:
            raise DatasetError(f"extra_y has width {self.extra_y.shape[1]}, expected {dataset.k}")


class ContrastDataset(BaseModel):
    """Labelled (W, Z) pairs with W the concatenation of one observation row and one target row.

    ``x_origin`` and ``y_origin`` record where each half of W comes from: indices below the number of
    source rows point into the supervised dataset, larger indices point into the marginal pools
    (offset by the number of source rows). For multi-target data ``y_origin`` indexes the row-major
    flattened target matrix.
    """

    model_config = _ARRAYS

    W: np.ndarray
    Z: np.ndarray
    x_origin: np.ndarray
    y_origin: np.ndarray

    @field_validator("W", mode="before")
    def _matrix(cls, value):
        return _as_matrix(value, "W", allow_empty=True)

    @field_validator("Z", "x_origin", "y_origin", mode="before")
    def _integers(cls, value):
        return np.asarray(value, dtype=np.int64).ravel()

    @model_validator(mode="after")
    def _consistent(self):
        size = self.W.shape[0]
        if not self.Z.shape[0] == self.x_origin.shape[0] == self.y_origin.shape[0] == size:
            raise DatasetError("W, Z and origin indices must have the same length")
        if np.any((self.Z != 0) & (self.Z != 1)):
            raise DatasetError("Z labels must be 0 or 1")
        return self

    @property
    def size(self):
        """Number of samples N."""
        return self.W.shape[0]

    @property
    def n_joint(self):
        """Number of matched samples (Z = 1)."""
        return int(self.Z.sum())

    @property
    def n_marg(self):
        """Number of mismatched samples (Z = 0)."""
        return self.size - self.n_joint

    @property
    def ratio(self):
        """Realized ratio n_joint / N."""
        return self.n_joint / self.size

    @classmethod
    def concatenate(cls, parts: Sequence["ContrastDataset"]) -> "ContrastDataset":
        """Stack contrast datasets in order."""
        parts = [part for part in parts if part.size]
        if not parts:
            raise DatasetError("cannot concatenate an empty list of contrast datasets")
        return cls(
            W=np.vstack([part.W for part in parts]),
            Z=np.concatenate([part.Z for part in parts]),
            x_origin=np.concatenate([part.x_origin for part in parts]),
            y_origin=np.concatenate([part.y_origin for part in parts]),
        )


class Standardization(BaseModel):
    """Per-column mean and scale captured on a matrix; constant columns keep a unit scale."""

    model_config = ConfigDict(frozen=True)

    mean: List[float]
    scale: List[float]

    @classmethod
    def fit(cls, matrix):
        """Capture column means and population standard deviations of ``matrix``."""
        matrix = _as_matrix(matrix, "matrix")
        mean = matrix.mean(axis=0)
        scale = matrix.std(axis=0)
        scale[scale == 0] = 1.0
        return cls(mean=mean.tolist(), scale=scale.tolist())

    @classmethod
    def identity(cls, width):
        """A record that leaves ``width`` columns unchanged."""
        return cls(mean=[0.0] * width, scale=[1.0] * width)

    @property
    def width(self):
        """Number of columns the record applies to."""
        return len(self.mean)

    def transform(self, matrix):
        """Standardize ``matrix`` column by column."""
        return (np.asarray(matrix, dtype=float) - np.asarray(self.mean)) / np.asarray(self.scale)

    def inverse_transform(self, matrix):
        """Map standardized values back to the original units."""
        return np.asarray(matrix, dtype=float) * np.asarray(self.scale) + np.asarray(self.mean)


class CsvDataset(BaseModel):
    """Numeric table read from a comma separated file with one header row."""

    model_config = _ARRAYS

    header: List[str]
    values: np.ndarray

    @model_validator(mode="after")
    def _rectangular(self):
        if self.values.ndim != 2 or self.values.shape[1] != len(self.header):
            raise DatasetError("CSV values must be a matrix with one column per header name")
        if self.values.shape[0] < 1:
            raise DatasetError("CSV file holds a header but no data rows")
        return self

    @classmethod
    def read(cls, path, min_columns=2):
        """Parse a numeric CSV file.

        Args:
            path (str): Path to the file.
            min_columns (int): Minimum number of columns, 2 for a dataset with features and a target.

        Returns:
            CsvDataset: Parsed header and values.
        """
        if not os.path.isfile(path):
            raise DatasetError(f"CSV file {path} does not exist")
        with open(path, newline="", encoding="utf-8") as fileh:
            reader = csv.reader(fileh)
            try:
                header = [name.strip() for name in next(reader)]
            except StopIteration as exc:
                raise DatasetError(f"CSV file {path} is empty") from exc
            rows = []
            for row_number, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != len(header):
                    raise DatasetError(
                        f"expected {len(header)} cells, found {len(row)}", row=row_number, column=None
                    )
                parsed = []
                for name, cell in zip(header, row):
                    try:
                        number = float(cell)
                    except ValueError as exc:
                        raise DatasetError(f"non numeric cell {cell!r}", row=row_number, column=name) from exc
                    if not math.isfinite(number):
                        raise DatasetError(f"non finite cell {cell!r}", row=row_number, column=name)
                    parsed.append(number)
                rows.append(parsed)
        if len(header) < min_columns:
            raise DatasetError(f"CSV file {path} needs at least {min_columns} columns")
        if not rows:
            raise DatasetError(f"CSV file {path} holds a header but no data rows")
        values = np.array(rows, dtype=float).reshape(len(rows), len(header))
        return cls(header=header, values=values)

    def column_index(self, target_column: Union[str, int]) -> int:
        """Resolve a column given by name or by position."""
        if isinstance(target_column, int) or str(target_column).lstrip("-").isdigit():
            index = int(target_column)
            if -len(self.header) <= index < len(self.header):
                return index % len(self.header)
        elif target_column in self.header:
            return self.header.index(target_column)
        raise DatasetError(f"target column {target_column!r} not found in header {self.header}")

    def to_supervised(self, target_column) -> Tuple[SupervisedDataset, Standardization]:
        """Standardize every column and split features from the target column.

        Returns:
            tuple: The standardized SupervisedDataset and the Standardization record of the columns
            in file order.
        """
        target = self.column_index(target_column)
        record = Standardization.fit(self.values)
        standardized = record.transform(self.values)
        features = [index for index in range(len(self.header)) if index != target]
        dataset = SupervisedDataset(X=standardized[:, features], Y=standardized[:, [target]])
        return dataset, record


def ingest_csv(path, target_column) -> Tuple[SupervisedDataset, Standardization]:
    """Read, validate and standardize a CSV file.

    Args:
        path (str): CSV file with one header row and numeric cells.
        target_column (str, int): Name or position of the target column.

    Returns:
        tuple: (SupervisedDataset, Standardization).
    """
    return CsvDataset.read(path).to_supervised(target_column)


def write_csv(path, header, rows):
    """Write rows of numbers with 17 significant digits so that a reload is bit-faithful."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fileh:
        writer = csv.writer(fileh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_number(value) for value in row])


def format_number(value):
    """Format a number for CSV output (integers verbatim, floats with 17 significant digits)."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)

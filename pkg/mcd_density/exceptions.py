"""Exception classes used in mcd-density.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
  http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
"""


class McdError(Exception):
    """Base class for every error raised by mcd-density.

    Args (Exception): Base Exception Object
    """


class ContrastDomainError(McdError, ValueError):
    """Raised when a contrast identity is evaluated outside of its domain.

    Args (Exception): Base Exception Object
    """


class ConstructionError(McdError, ValueError):
    """Raised when a contrast dataset cannot be built from the supplied data.

    Args (Exception): Base Exception Object
    """


class DegenerateContrastDataset(McdError, ValueError):
    """Raised when a discriminator is fitted on a contrast dataset holding a single class.

    Args (Exception): Base Exception Object
    """


class DegenerateDensity(McdError, ValueError):
    """Raised when a density on a grid integrates to zero and cannot be rescaled.

    Args (Exception): Base Exception Object
    """


class DatasetError(McdError, ValueError):
    """Raised when a dataset is malformed (shape, NaN, non numeric cell, missing column).

    Args (Exception): Base Exception Object
    """

    def __init__(self, message, row=None, column=None):
        """Provide the location of the offending cell when it is known."""
        super().__init__(message)
        self.message = message
        self.row = row
        self.column = column

    def __str__(self):
        """Generate error string including the offending cell location."""
        location = []
        if self.row is not None:
            location.append(f"row {self.row}")
        if self.column is not None:
            location.append(f"column {self.column!r}")
        if not location:
            return self.message
        return f"{self.message} ({', '.join(location)})"


class UnknownDensityModel(McdError, KeyError):
    """Raised when a density model name is not registered.

    Args (Exception): Base Exception Object
    """

    def __init__(self, name, registry):
        """Keep the requested name and the available names."""
        super().__init__(name)
        self.name = name
        self.registry = sorted(registry)

    def __str__(self):
        """Generate error string listing the registered models."""
        return f"Unknown density model {self.name!r}, available models: {', '.join(self.registry)}"


class IncompatibleConstruction(McdError, ValueError):
    """Raised when a construction cannot be applied to the provided data.

    Args (Exception): Base Exception Object
    """


class MetricShapeError(McdError, ValueError):
    """Raised when true and predicted densities do not have the same shape.

    Args (Exception): Base Exception Object
    """


class ModelFileError(McdError):
    """Raised when a fitted model file cannot be read back.

    Args (Exception): Base Exception Object
    """


class ReportWriteError(McdError, OSError):
    """Raised when a result table cannot be written to the requested path.

    Args (Exception): Base Exception Object
    """

"""Library of utility functions."""
import os
from collections.abc import Mapping, Sequence

import numpy as np
from click import Option, UsageError
from ruamel.yaml import YAML
from termcolor import colored

YAML_HANDLER = YAML()
YAML_HANDLER.indent(sequence=4, offset=2)
YAML_HANDLER.explicit_start = True


def warn(msg):
    """Print warning message in yellow."""
    print(colored("WARNING |", "yellow"), msg)


def error(msg):
    """Print a error message in red."""
    print(colored("  ERROR |", "red"), msg)


def info(msg):
    """Print an informational message in cyan."""
    print(colored("   INFO |", "cyan"), msg)


def to_builtin(data):
    """Recursively convert numpy scalars and arrays into plain Python objects.

    Args:
        data (Any): A structure made of mappings, sequences, numpy arrays and scalars.

    Returns:
        Any: The same structure using only dict, list, float, int, bool and str.

    Example:
        >>> to_builtin({"beta": np.array([0.5, 1.0]), "n": np.int64(3)})
        {'beta': [0.5, 1.0], 'n': 3}
    """
    if isinstance(data, np.ndarray):
        return to_builtin(data.tolist())
    if isinstance(data, np.bool_):
        return bool(data)
    if isinstance(data, np.integer):
        return int(data)
    if isinstance(data, np.floating):
        return float(data)
    if isinstance(data, Mapping):
        return {str(key): to_builtin(value) for key, value in data.items()}
    if isinstance(data, Sequence) and not isinstance(data, str):
        return [to_builtin(entry) for entry in data]
    return data


def dump_data_to_yaml(data, yaml_path):
    """Dumps data to a YAML file.

    Floats are written by ruamel with their shortest round-trip representation, so a reload gives
    back bit-identical values.

    Args:
        data (dict): The data to write to a YAML file.
        yaml_path (str): The path where to write the YAML file.

    Returns:
        None: Data is written to a file.
    """
    directory = os.path.dirname(os.path.abspath(yaml_path))
    os.makedirs(directory, exist_ok=True)
    with open(yaml_path, "w", encoding="utf-8") as fileh:
        YAML_HANDLER.dump(to_builtin(data), fileh)


def load_file(filename):
    """Loads the specified YAML file.

    Returns:
        dict or list: content of the file in a python variable.
    """
    with open(filename, "r", encoding="utf-8") as fileh:
        file_data = YAML_HANDLER.load(fileh)

    return file_data


def substream(seed, *indices):
    """Return a numpy Generator derived from ``seed`` and a tuple of integer indices.

    The same (seed, indices) always yields the same stream, whatever the order in which streams
    are requested, so cells of a benchmark can run serially or in parallel with identical results.

    Args:
        seed (int): Root seed of the experiment.
        indices (int): Position of the stream, e.g. the benchmark cell index.

    Returns:
        numpy.random.Generator: An independent generator.
    """
    return np.random.default_rng(np.random.SeedSequence([int(seed), *[int(index) for index in indices]]))


class MutuallyExclusiveOption(Option):
    """Add support for Mutually Exclusive option in Click.

    Examples:
        @command(help="Run the command.")
        @option('--grid-points', cls=MutuallyExclusiveOption,
                help="Size of the prediction grid.",
                mutually_exclusive=["target_column"])
        @option('--target-column',
                cls=MutuallyExclusiveOption,
                help="Column holding the target values.",
                mutually_exclusive=["grid_points"])
        def cli(grid_points, target_column):
            ...
    """

    def __init__(self, *args, **kwargs):
        """Initializes MutuallyExclusiveOption class."""
        self.mutually_exclusive = set(kwargs.pop("mutually_exclusive", []))
        help = kwargs.get("help", "")  # pylint: disable=redefined-builtin
        if self.mutually_exclusive:
            ex_str = ", ".join(sorted(self.mutually_exclusive))
            kwargs["help"] = help + (" NOTE: This argument is mutually exclusive with " " arguments: [" + ex_str + "].")
        super().__init__(*args, **kwargs)

    def handle_parse_result(self, ctx, opts, args):
        """Validate that two mutually exclusive arguments are not provided together.

        Args:
            ctx : context.
            opts : options.
            args : arguments.

        Raises:
            UsageError: If two mutually exclusive arguments are provided.

        Returns:
            ctx, opts, args.
        """
        if self.mutually_exclusive.intersection(opts) and self.name in opts:
            raise UsageError(
                f"Illegal usage: `{self.name}` is mutually exclusive with "
                f"arguments `{', '.join(sorted(self.mutually_exclusive))}`."
            )

        return super().handle_parse_result(ctx, opts, args)

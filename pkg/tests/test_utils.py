"""Tests to validate functions defined in utils.py"""
import os

import click
import numpy as np
from click.testing import CliRunner

from mcd_density import utils

# fmt: off
TEST_DATA = {
    'key': 'value',
    "list_of_floats": [0.1, 1 / 3],
    "list_of_lists": [[1, 2], [3, 4]],
    "nested": {
        "beta": np.array([0.25, 0.5]),
        "count": np.int64(7),
        "flag": np.bool_(True),
    },
}
# fmt: on


def test_to_builtin():
    converted = utils.to_builtin(TEST_DATA)
    assert converted["nested"] == {"beta": [0.25, 0.5], "count": 7, "flag": True}
    assert isinstance(converted["nested"]["count"], int)
    assert converted["list_of_lists"] == [[1, 2], [3, 4]]


def test_dump_data_to_yaml(tmp_path):
    test_file = os.path.join(tmp_path, "nested", "data.yml")
    utils.dump_data_to_yaml(TEST_DATA, test_file)
    with open(test_file, encoding="utf-8") as fileh:
        assert fileh.readline().strip() == "---"
    loaded = utils.load_file(test_file)
    assert loaded["key"] == "value"
    assert loaded["list_of_floats"] == [0.1, 1 / 3]
    assert loaded["nested"]["beta"] == [0.25, 0.5]


def test_substream_deterministic():
    first = utils.substream(3, 1, 2).random(5)
    second = utils.substream(3, 1, 2).random(5)
    np.testing.assert_array_equal(first, second)


def test_substream_independent_of_request_order():
    late = [utils.substream(0, index) for index in range(3)][2].random(4)
    np.testing.assert_array_equal(late, utils.substream(0, 2).random(4))
    assert not np.array_equal(utils.substream(0, 1).random(4), utils.substream(0, 2).random(4))


def test_messages(capsys):
    utils.warn("careful")
    utils.error("broken")
    utils.info("done")
    output = capsys.readouterr().out
    assert "WARNING |" in output and "careful" in output
    assert "ERROR |" in output and "broken" in output
    assert "INFO |" in output and "done" in output


@click.command()
@click.option("--grid-points", cls=utils.MutuallyExclusiveOption, mutually_exclusive=["target_column"])
@click.option("--target-column", cls=utils.MutuallyExclusiveOption, mutually_exclusive=["grid_points"])
def _command(grid_points, target_column):
    print(grid_points, target_column)


def test_mutually_exclusive_option():
    runner = CliRunner()
    assert runner.invoke(_command, ["--grid-points", "5"]).exit_code == 0
    result = runner.invoke(_command, ["--grid-points", "5", "--target-column", "y"])
    assert result.exit_code != 0
    assert "mutually exclusive" in result.output

"""Experiment settings loaded from pyproject.toml, a dictionary and the environment."""
import os
import os.path
import sys
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

import toml
from pydantic import BaseModel, ConfigDict, Field, PositiveInt, ValidationError
from pydantic_settings import BaseSettings, PydanticBaseSettingsSource, SettingsConfigDict

from mcd_density.estimator import McdConfig

SETTINGS = None


class AblationCell(BaseModel):
    """One (construction, ratio, n_x, n_y, m) setting of an ablation grid."""

    model_config = ConfigDict(extra="forbid")

    construction: Literal["iid", "id", "iid_additional", "id_additional", "id_multitarget"]
    ratio: float = Field(gt=0.0, lt=1.0)
    n_x: int = Field(0, ge=0)
    n_y: int = Field(0, ge=0)
    m: Optional[PositiveInt] = None


class DensityBenchSettings(BaseModel):
    """Settings of the benchmark on synthetic density models."""

    model_config = ConfigDict(extra="forbid")

    models: List[str] = Field(default_factory=lambda: ["basic_linear", "asymmetric_linear"])
    feature_dim: PositiveInt = 10
    model_params: Dict[str, Dict[str, Any]] = Field(default_factory=dict)
    discriminators: List[str] = Field(default_factory=lambda: ["mlp"])
    repetitions: PositiveInt = 5
    pilot_size: PositiveInt = 100_000
    normalize_kl: bool = False


class RealBenchSettings(BaseModel):
    """Settings of the benchmark on a user supplied CSV dataset."""

    model_config = ConfigDict(extra="forbid")

    path: Optional[str] = None
    target_column: Union[int, str] = -1
    discriminators: List[str] = Field(default_factory=lambda: ["mlp"])
    repetitions: PositiveInt = 5


class AblationSettings(BaseModel):
    """Settings of the construction and ratio ablations."""

    model_config = ConfigDict(extra="forbid")

    model: str = "asymmetric_linear"
    feature_dim: PositiveInt = 10
    model_params: Dict[str, Any] = Field(default_factory=dict)
    preset: Literal["ratio", "marginal", "multitarget"] = "ratio"
    cells: List[AblationCell] = Field(default_factory=list)
    repetitions: PositiveInt = 5


class ExperimentConfig(BaseSettings):  # pylint: disable=too-few-public-methods
    """Main Settings Class for the project.

    The type of each setting is defined using Python annotations and is validated when a config
    file is loaded with Pydantic. Environment variables use the ``MCD_`` prefix and ``__`` between
    nested names, e.g. ``MCD_SEED`` or ``MCD_MCD__RATIO``.
    """

    model_config = SettingsConfigDict(env_prefix="MCD_", env_nested_delimiter="__", extra="forbid")

    seed: int = 0
    n_train: int = Field(100, ge=2)
    n_test: PositiveInt = 100
    grid_points: int = Field(10_000, ge=2)
    rescale: bool = False
    record_timing: bool = False
    workers: PositiveInt = 1
    output: Optional[str] = None
    format: Literal["csv", "markdown"] = "csv"

    mcd: McdConfig = Field(default_factory=McdConfig)
    density: DensityBenchSettings = Field(default_factory=DensityBenchSettings)
    real: RealBenchSettings = Field(default_factory=RealBenchSettings)
    ablation: AblationSettings = Field(default_factory=AblationSettings)

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls,
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ):
        """Environment variables take precedence over values read from the config file."""
        return env_settings, init_settings, dotenv_settings, file_secret_settings


def _merge(base, override):
    """Recursively merge ``override`` on top of ``base``."""
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load(config_file_name="pyproject.toml", config_data=None):
    """Load configuration.

    Configuration is loaded from a file in pyproject.toml format that contains the settings in a
    [tool.mcd_density] table, merged with the dictionary passed in as "config_data" (which wins).
    If nothing is found in the config file or if the config file does not exist, the default values
    will be used. Environment variables override both.

    Args:
        config_file_name (str, optional): Name of the configuration file to load. Defaults to "pyproject.toml".
        config_data (dict, optional): dict of settings merged over the config file. Defaults to None.
    """
    global SETTINGS  # pylint: disable=global-statement

    file_data = {}
    if config_file_name and os.path.exists(config_file_name):
        config_string = Path(config_file_name).read_text(encoding="utf-8")
        config_tmp = toml.loads(config_string)
        file_data = config_tmp.get("tool", {}).get("mcd_density", {})

    SETTINGS = ExperimentConfig(**_merge(file_data, config_data or {}))
    return SETTINGS


def load_and_exit(config_file_name="pyproject.toml", config_data=None):
    """Calls load, but wraps it in a try except block.

    This is done to handle a ValidationError which is raised when settings are specified but invalid.
    In such cases, a message is printed to the screen indicating the settings which don't pass validation.

    Args:
        config_file_name (str, optional): Name of the configuration file to load. Defaults to "pyproject.toml".
        config_data (dict, optional): dict of settings merged over the config file. Defaults to None.
    """
    try:
        return load(config_file_name=config_file_name, config_data=config_data)
    except (ValidationError, toml.TomlDecodeError) as err:
        if isinstance(err, toml.TomlDecodeError):
            print(f"Configuration not valid, unable to parse {config_file_name}: {err}")
        else:
            print(f"Configuration not valid, found {len(err.errors())} error(s)")
            for error in err.errors():
                print(f"  {'/'.join(str(item) for item in error['loc'])} | {error['msg']} ({error['type']})")
        sys.exit(1)

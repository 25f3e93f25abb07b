# Copyright (C) 2026, streetperson contributors (see `doc/contributors.txt`)
# See the file LICENSE for licensing terms.

"""
config.py - packaged defaults and run configuration

Configuration precedence is

  command line flags > environment variable `STP_DATA_DIR` >
  config file (`--config`) > packaged defaults

The environment variable only sets the data directory.
"""

import dataclasses
import io
import logging
import os
import typing

import yaml

import streetperson.error


__all__ = ["load_defaults", "Hyperparameters", "RunConfig", "resolve"]

logger = logging.getLogger(__name__)

DATA_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "data")
DEFAULTS_PATH = os.path.join(DATA_DIR, "wikidata.yaml")
DEFAULT_AFFIX_DIR = os.path.join(DATA_DIR, "affixes")

DATA_DIR_ENV_VARIABLE = "STP_DATA_DIR"

RELATION_KINDS = ("born", "died", "buried", "educated_at", "work_location")


def _read_yaml(path):
    with streetperson.error.source_error_to_ingest_error("config", path):
        with io.open(path, encoding="utf-8") as fobj:
            content = yaml.safe_load(fobj)
    if content is None:
        return {}
    if not isinstance(content, dict):
        raise streetperson.error.UsageError(
                "config file {0!r} must contain a mapping".format(path))
    return content


def load_defaults(path=None):
    """
    Return the Wikidata defaults (properties, classes, relation
    mapping, name stop tokens) as a dictionary.

    If `path` is given, its top-level keys override the packaged
    defaults. A relation mapping must name exactly the five relation
    kinds; otherwise raise a `UsageError`.
    """
    defaults = _read_yaml(DEFAULTS_PATH)
    if path is not None:
        overrides = _read_yaml(path)
        defaults.update({key: value for key, value in overrides.items()
                         if key in defaults})
    if set(defaults["relations"]) != set(RELATION_KINDS):
        raise streetperson.error.UsageError(
                "relation mapping must have exactly the kinds {0}".format(
                  ", ".join(RELATION_KINDS)))
    return defaults


@dataclasses.dataclass(frozen=True)
class Hyperparameters:
    """Training parameters of the street-to-person classifier."""
    learning_rate: float = 0.1
    l2: float = 1e-4
    epochs: int = 500
    seed: int = 42

    def as_dict(self):
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data):
        fields = {field.name for field in dataclasses.fields(cls)}
        return cls(**{key: value for key, value in data.items()
                      if key in fields})


@dataclasses.dataclass
class RunConfig:
    """Settings shared by all command line stages."""
    data_dir: str = "."
    language: str = "de"
    affix_dir: str = DEFAULT_AFFIX_DIR
    seed: int = 42
    threshold: float = 0.5
    hyperparameters: Hyperparameters = dataclasses.field(
                                         default_factory=Hyperparameters)
    region_ids: typing.Tuple[str, ...] = ()
    threads: int = 1
    quiet: bool = False
    config_path: typing.Optional[str] = None

    def data_path(self, name):
        """Return `name` resolved against the data directory."""
        return os.path.join(self.data_dir, name)


# Keys of a config file mapped to `RunConfig` fields.
_file_keys = ("data_dir", "language", "affix_dir", "seed", "threshold",
              "region_ids", "threads")


def resolve(flags, environ=None):
    """
    Return a `RunConfig` from the parsed command line `flags` (an
    `argparse.Namespace`), the environment `environ` (default
    `os.environ`) and the config file named by `flags.config`.

    Flags not given on the command line are `None` in `flags`.
    """
    if environ is None:
        environ = os.environ
    settings = {}
    config_path = getattr(flags, "config", None)
    if config_path is not None:
        if not os.path.isfile(config_path):
            raise streetperson.error.UsageError(
                    "config file {0!r} doesn't exist".format(config_path))
        file_settings = _read_yaml(config_path)
        settings.update({key: file_settings[key] for key in _file_keys
                         if key in file_settings})
        hyperparameters = file_settings.get("hyperparameters")
        if hyperparameters:
            settings["hyperparameters"] = Hyperparameters.from_dict(
                                            hyperparameters)
    if environ.get(DATA_DIR_ENV_VARIABLE):
        settings["data_dir"] = environ[DATA_DIR_ENV_VARIABLE]
    for key in _file_keys + ("quiet",):
        value = getattr(flags, key, None)
        if value is not None:
            settings[key] = value
    if "region_ids" in settings:
        region_ids = settings["region_ids"]
        if isinstance(region_ids, str):
            region_ids = [part for part in region_ids.split(",") if part]
        settings["region_ids"] = tuple(region_ids)
    run_config = RunConfig(config_path=config_path, **settings)
    # The run seed is also the training seed.
    overrides = {"seed": run_config.seed}
    for key in ("learning_rate", "l2", "epochs"):
        value = getattr(flags, key, None)
        if value is not None:
            overrides[key] = value
    run_config.hyperparameters = dataclasses.replace(
                                   run_config.hyperparameters, **overrides)
    if not os.path.isdir(run_config.affix_dir):
        raise streetperson.error.UsageError(
                "affix directory {0!r} doesn't exist".format(
                  run_config.affix_dir))
    logger.debug("resolved run config %s", run_config)
    return run_config

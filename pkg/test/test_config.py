# Copyright (C) 2026, streetperson contributors (see `doc/contributors.txt`)
# See the file LICENSE for licensing terms.

import argparse
import io

import pytest

import streetperson.config
import streetperson.error


def flags(**kwargs):
    """Return a namespace like the one from the command line parser."""
    return argparse.Namespace(**kwargs)


def write_config(tmp_path, text):
    path = str(tmp_path / "streetperson.yaml")
    with io.open(path, "w", encoding="utf-8") as fobj:
        fobj.write(text)
    return path


class TestDefaults(object):

    def test_packaged_defaults(self):
        defaults = streetperson.config.load_defaults()
        assert defaults["properties"]["named_after"] == "P138"
        assert defaults["human_class"] == "Q5"
        assert set(defaults["relations"]) == \
               set(streetperson.config.RELATION_KINDS)
        # The label language is a run setting.
        assert "language" not in defaults

    def test_override(self, tmp_path):
        path = write_config(tmp_path, "fallback_language: fr\n"
                                      "unknown_key: 1\n")
        defaults = streetperson.config.load_defaults(path)
        assert defaults["fallback_language"] == "fr"
        assert "unknown_key" not in defaults

    def test_incomplete_relation_mapping(self, tmp_path):
        path = write_config(tmp_path, "relations:\n  born: P19\n")
        with pytest.raises(streetperson.error.UsageError):
            streetperson.config.load_defaults(path)

    def test_non_mapping(self, tmp_path):
        path = write_config(tmp_path, "- a\n- b\n")
        with pytest.raises(streetperson.error.UsageError):
            streetperson.config.load_defaults(path)


class TestHyperparameters(object):

    def test_defaults(self):
        hyperparameters = streetperson.config.Hyperparameters()
        assert hyperparameters.learning_rate == 0.1
        assert hyperparameters.l2 == 1e-4
        assert hyperparameters.epochs == 500
        assert hyperparameters.seed == 42

    def test_from_dict_ignores_unknown_keys(self):
        hyperparameters = streetperson.config.Hyperparameters.from_dict(
                            {"epochs": 20, "momentum": 0.9})
        assert hyperparameters.epochs == 20
        assert hyperparameters.as_dict()["epochs"] == 20


class TestResolve(object):
    """Test the precedence flags > environment > config file > defaults."""

    def test_defaults(self):
        run_config = streetperson.config.resolve(flags(), environ={})
        assert run_config.data_dir == "."
        assert run_config.language == "de"
        assert run_config.threshold == 0.5
        assert run_config.region_ids == ()
        assert run_config.hyperparameters.seed == 42

    def test_environment(self):
        run_config = streetperson.config.resolve(
                       flags(), environ={"STP_DATA_DIR": "/data"})
        assert run_config.data_dir == "/data"
        assert run_config.data_path("index.stb") == "/data/index.stb"

    def test_flag_beats_environment(self):
        run_config = streetperson.config.resolve(
                       flags(data_dir="/flag"),
                       environ={"STP_DATA_DIR": "/data"})
        assert run_config.data_dir == "/flag"

    def test_config_file(self, tmp_path):
        path = write_config(tmp_path,
                            "data_dir: /from-file\n"
                            "threshold: 0.7\n"
                            "region_ids: [Q64, Q1055]\n"
                            "hyperparameters:\n"
                            "  epochs: 50\n")
        run_config = streetperson.config.resolve(
                       flags(config=path, threshold=0.6), environ={})
        assert run_config.data_dir == "/from-file"
        assert run_config.threshold == 0.6
        assert run_config.region_ids == ("Q64", "Q1055")
        assert run_config.hyperparameters.epochs == 50
        assert run_config.config_path == path

    def test_region_flag(self):
        run_config = streetperson.config.resolve(
                       flags(region_ids="Q64,Q1055,"), environ={})
        assert run_config.region_ids == ("Q64", "Q1055")

    def test_seed_is_training_seed(self):
        run_config = streetperson.config.resolve(
                       flags(seed=7, epochs=10), environ={})
        assert run_config.seed == 7
        assert run_config.hyperparameters.seed == 7
        assert run_config.hyperparameters.epochs == 10

    def test_missing_config_file(self, tmp_path):
        with pytest.raises(streetperson.error.UsageError):
            streetperson.config.resolve(
              flags(config=str(tmp_path / "missing.yaml")), environ={})

    def test_missing_affix_dir(self, tmp_path):
        with pytest.raises(streetperson.error.UsageError):
            streetperson.config.resolve(
              flags(affix_dir=str(tmp_path / "missing")), environ={})

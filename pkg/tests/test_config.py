"""
Experiment configuration: defaults, files, flags and validation.
"""

import os

import pytest

from attnfuse.config import (DEFAULT_CONFIG, build_config, load_config_file,
                             parse_categories)
from attnfuse.errors import ConfigError, LeakageError
from attnfuse.fuse import FeatureMode, Strategy

from .helper import cd, write_file


@pytest.fixture(autouse=True)
def no_cache_env(monkeypatch):
    monkeypatch.delenv("ATTNFUSE_CACHE_DIR", raising=False)


def test_defaults():
    config = build_config()
    assert config.window_length == 60
    assert config.fusion.strategy is Strategy.SUM
    assert config.fusion.categories == ("EB", "EAR", "HS", "NS", "HP", "Exp", "H")
    assert config.feature_mode is FeatureMode.LOCAL
    assert config.threshold_scope == "fold"
    assert config.normalize_categories == ("HS", "NS")
    assert len(config.c_grid) == 11


def test_dp_defaults_to_global_features():
    assert build_config(overrides={"FUSION": "dp"}).feature_mode is FeatureMode.GLOBAL


def test_flags_override_the_file():
    file_values = {"WINDOW_LENGTH": 30, "SEED": 4}
    config = build_config(file_values, {"WINDOW_LENGTH": "120", "SEED": None, "CATEGORIES": "eb, exp"})
    assert config.window_length == 120
    assert config.seed == 4
    assert config.fusion.categories == ("EB", "Exp")


@pytest.mark.parametrize("overrides", [
    {"WINDOW_LENGTH": 45},
    {"WINDOW_LENGTH": "30.5"},
    {"LOW_PERCENTILE": 95},
    {"TAU_LOW": 20},
    {"TAU_LOW": 80, "TAU_HIGH": 20},
    {"THRESHOLD_SCOPE": "global"},
    {"FUSION": "vote"},
    {"FEATURE_MODE": "mixed"},
    {"CATEGORIES": "EB,Pupil"},
    {"FUSION": "dp", "FEATURE_MODE": "local"},
    {"FUSION": "none", "CATEGORIES": "EB,H"},
    {"THREADS": 0},
    {"C_GRID": [1.0, -1.0]},
    {"MLP_DROPOUT": 1.0},
])
def test_invalid_settings(overrides):
    with pytest.raises(ConfigError):
        build_config(overrides=overrides)


def test_strict_leakage_rejects_pooled_thresholds():
    with pytest.raises(LeakageError) as excinfo:
        build_config(overrides={"STRICT_LEAKAGE": True, "THRESHOLD_SCOPE": "pooled"})
    assert excinfo.value.exit_code == 1
    config = build_config(overrides={"STRICT_LEAKAGE": True, "THRESHOLD_SCOPE": "pooled",
                                     "TAU_LOW": 30, "TAU_HIGH": 70})
    assert config.tau_low == 30.0


def test_cache_folder_from_environment(monkeypatch):
    monkeypatch.setenv("ATTNFUSE_CACHE_DIR", "/tmp/elsewhere")
    assert build_config(overrides={"CACHE_FOLDER": "cache"}).cache_folder == "/tmp/elsewhere"


def test_hash_ignores_runtime_settings():
    base = build_config()
    assert build_config(overrides={"THREADS": 4, "OUTPUT_FOLDER": "x", "CACHE_FOLDER": "y"}).config_hash == \
        base.config_hash
    assert build_config(overrides={"SEED": 1}).config_hash != base.config_hash
    assert "THREADS" not in base.echo()


def test_window_cache_key_ignores_fusion():
    base = build_config()
    assert build_config(overrides={"FUSION": "nn"}).window_cache_key == base.window_cache_key
    assert build_config(overrides={"WINDOW_LENGTH": 30}).window_cache_key != base.window_cache_key


def test_echo_is_normalized():
    echo = build_config(overrides={"SEED": "7", "CATEGORIES": "exp,eb"}).echo()
    assert echo["SEED"] == 7
    assert echo["CATEGORIES"] == ["Exp", "EB"]
    assert set(echo) == set(DEFAULT_CONFIG) - {"OUTPUT_FOLDER", "CACHE_FOLDER", "THREADS"}


def test_parse_categories():
    assert parse_categories("Exp, eb,EXP") == ("Exp", "EB")
    assert parse_categories(["H"]) == ("H",)
    with pytest.raises(ConfigError):
        parse_categories(" , ")


def test_load_config_file(tmp_path):
    path = write_file(tmp_path / "attnfuse.toml", 'WINDOW_LENGTH = 30\nCATEGORIES = ["EB", "H"]\n')
    assert load_config_file(path) == {"WINDOW_LENGTH": 30, "CATEGORIES": ["EB", "H"]}


def test_config_file_is_found_upwards(tmp_path):
    write_file(tmp_path / "attnfuse.toml", "SEED = 3\n")
    os.makedirs(str(tmp_path / "a" / "b"))
    with cd(str(tmp_path / "a" / "b")):
        assert load_config_file() == {"SEED": 3}


@pytest.mark.parametrize("name, text", [
    ("attnfuse.toml", "SEEDS = 3\n"),
    ("attnfuse.toml", "SEED = \n"),
    ("attnfuse.ini", "[x]\n"),
])
def test_bad_config_files(tmp_path, name, text):
    with pytest.raises(ConfigError):
        load_config_file(write_file(tmp_path / name, text))


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config_file(str(tmp_path / "nope.toml"))

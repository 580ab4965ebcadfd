# -*- coding: utf-8 -*-

# Copyright © 2023-2024 the attnfuse authors.

# Permission is hereby granted, free of charge, to any
# person obtaining a copy of this software and associated
# documentation files (the "Software"), to deal in the
# Software without restriction, including without limitation
# the rights to use, copy, modify, merge, publish,
# distribute, sublicense, and/or sell copies of the
# Software, and to permit persons to whom the Software is
# furnished to do so, subject to the following conditions:
#
# The above copyright notice and this permission notice
# shall be included in all copies or substantial portions of
# the Software.
#
# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY
# KIND, EXPRESS OR IMPLIED, INCLUDING BUT NOT LIMITED TO THE
# WARRANTIES OF MERCHANTABILITY, FITNESS FOR A PARTICULAR
# PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE AUTHORS
# OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR
# OTHER LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR
# OTHERWISE, ARISING FROM, OUT OF OR IN CONNECTION WITH THE
# SOFTWARE OR THE USE OR OTHER DEALINGS IN THE SOFTWARE.

"""Experiment configuration: defaults, TOML loading, flag merging and validation."""

import dataclasses
import os
import typing

from . import utils
from .errors import ConfigError, LeakageError
from .fuse import FusionSpec, Strategy, FeatureMode
from .ingest import CATEGORIES

__all__ = ('DEFAULT_CONFIG', 'ExperimentConfig', 'load_config_file', 'build_config')

WINDOW_LENGTHS = (30, 60, 120)
C_GRID = tuple(10.0 ** k for k in range(-8, 3))

# Keys that only affect where or how fast things run; they never reach the
# echo or the hash, so reports do not depend on them.
RUNTIME_KEYS = ('OUTPUT_FOLDER', 'CACHE_FOLDER', 'THREADS')

DEFAULT_CONFIG = {
    'DATA_FOLDER': 'data',
    'OUTPUT_FOLDER': 'output',
    'CACHE_FOLDER': 'cache',
    'WINDOW_LENGTH': 60,
    'LOW_PERCENTILE': 10.0,
    'HIGH_PERCENTILE': 90.0,
    'TAU_LOW': None,
    'TAU_HIGH': None,
    'MAX_MISSING_FRACTION': 0.1,
    'THRESHOLD_SCOPE': 'fold',
    # None means "local, or global when FUSION is dp"
    'FEATURE_MODE': None,
    'FUSION': 'sum',
    'CATEGORIES': list(CATEGORIES),
    'DP_FRACTION': 0.10,
    'C_GRID': list(C_GRID),
    'SVM_TOLERANCE': 1e-3,
    'SVM_MAX_ITER': 100000,
    'INNER_VALIDATION_FRACTION': 0.2,
    'MLP_LEARNING_RATE': 0.05,
    'MLP_EPOCHS': 500,
    'MLP_DROPOUT': 0.5,
    'NORMALIZE_CATEGORIES': ['HS', 'NS'],
    'SEED': 0,
    'THREADS': 1,
    'STRICT_LEAKAGE': False,
    'EXHAUSTIVE_SUBSETS': False,
}

FUSION_NAMES = {
    'sum': Strategy.SUM,
    'nn': Strategy.NEURAL_NET,
    'dp': Strategy.DP_SELECT,
    'none': Strategy.NONE,
}


def parse_categories(value) -> typing.Tuple[str, ...]:
    """Parse a category list given as CSV text or a sequence; reject unknown names."""
    if isinstance(value, str):
        names = [v.strip() for v in value.split(',') if v.strip()]
    else:
        names = [str(v).strip() for v in value]
    if not names:
        raise ConfigError('no categories given', stage='config')
    lookup = {c.lower(): c for c in CATEGORIES}
    result = []
    for name in names:
        canonical = lookup.get(name.lower())
        if canonical is None:
            raise ConfigError('unknown category {0!r} (expected one of {1})'.format(
                name, ', '.join(CATEGORIES)), stage='config')
        if canonical not in result:
            result.append(canonical)
    return tuple(result)


@dataclasses.dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment settings shared by every stage."""

    data_folder: str
    output_folder: str
    cache_folder: str
    window_length: int
    low_percentile: float
    high_percentile: float
    tau_low: typing.Optional[float]
    tau_high: typing.Optional[float]
    max_missing_fraction: float
    threshold_scope: str
    fusion: FusionSpec
    c_grid: typing.Tuple[float, ...]
    svm_tolerance: float
    svm_max_iter: int
    inner_validation_fraction: float
    mlp_learning_rate: float
    mlp_epochs: int
    mlp_dropout: float
    normalize_categories: typing.Tuple[str, ...]
    seed: int
    threads: int
    strict_leakage: bool
    exhaustive_subsets: bool
    raw: typing.Dict[str, typing.Any] = dataclasses.field(compare=False, repr=False)

    @property
    def feature_mode(self) -> FeatureMode:
        """Return the feature mode of the fusion settings."""
        return self.fusion.feature_mode

    def echo(self) -> dict:
        """Return the settings that determine results, keyed like the config file."""
        return {k: v for k, v in self.raw.items() if k not in RUNTIME_KEYS}

    @property
    def config_hash(self) -> str:
        """Return the SHA-256 of the canonical echo."""
        return utils.stable_hash(self.echo())

    @property
    def window_cache_key(self) -> str:
        """Hash of the settings that determine the extracted windows."""
        keys = ('DATA_FOLDER', 'WINDOW_LENGTH', 'LOW_PERCENTILE', 'HIGH_PERCENTILE',
                'TAU_LOW', 'TAU_HIGH', 'MAX_MISSING_FRACTION', 'THRESHOLD_SCOPE',
                'NORMALIZE_CATEGORIES')
        return utils.stable_hash({k: self.raw[k] for k in keys})


def load_config_file(path=None) -> dict:
    """Load a TOML config file; without a path, look for attnfuse.toml upwards."""
    if path is None:
        root = utils.get_root_dir()
        if root is None:
            return {}
        path = os.path.join(root, utils.CONF_FILENAME)
    elif not os.path.exists(path):
        raise ConfigError('cannot find configuration file {0!r}'.format(path), stage='config')
    try:
        data = utils.load_data(path)
    except Exception as exc:
        raise ConfigError('{0!r} cannot be parsed: {1}'.format(path, exc), stage='config')
    if data is None:
        raise ConfigError('unsupported configuration format {0!r}'.format(path), stage='config')
    unknown = sorted(set(data) - set(DEFAULT_CONFIG))
    if unknown:
        raise ConfigError('unknown configuration keys: {0}'.format(', '.join(unknown)),
                          stage='config', record=path)
    return data


def _number(raw, key, kind=float):
    value = raw[key]
    try:
        if kind is int and float(value) != int(value):
            raise ValueError(value)
        return kind(value)
    except (TypeError, ValueError):
        raise ConfigError('{0} must be a number, got {1!r}'.format(key, value), stage='config')


def build_config(file_values=None, overrides=None) -> ExperimentConfig:
    """Merge defaults, file values and flag overrides into a validated config.

    Overrides whose value is None are ignored, so unset flags keep file values.
    """
    raw = dict(DEFAULT_CONFIG)
    raw.update(file_values or {})
    for key, value in (overrides or {}).items():
        if value is not None:
            raw[key] = value
    cache_env = os.getenv('ATTNFUSE_CACHE_DIR')
    if cache_env:
        raw['CACHE_FOLDER'] = cache_env

    window = _number(raw, 'WINDOW_LENGTH', int)
    if window not in WINDOW_LENGTHS:
        raise ConfigError('WINDOW_LENGTH must be one of {0}, got {1}'.format(WINDOW_LENGTHS, window),
                          stage='config')
    low = _number(raw, 'LOW_PERCENTILE')
    high = _number(raw, 'HIGH_PERCENTILE')
    if not 0 < low < high < 100:
        raise ConfigError('percentiles must satisfy 0 < low < high < 100', stage='config')

    tau_low, tau_high = raw['TAU_LOW'], raw['TAU_HIGH']
    if (tau_low is None) != (tau_high is None):
        raise ConfigError('TAU_LOW and TAU_HIGH must be given together', stage='config')
    if tau_low is not None:
        tau_low, tau_high = _number(raw, 'TAU_LOW'), _number(raw, 'TAU_HIGH')
        if not tau_low < tau_high:
            raise ConfigError('TAU_LOW must be below TAU_HIGH', stage='config')

    missing = _number(raw, 'MAX_MISSING_FRACTION')
    if not 0 <= missing <= 1:
        raise ConfigError('MAX_MISSING_FRACTION must lie in [0, 1]', stage='config')

    scope = str(raw['THRESHOLD_SCOPE']).lower()
    if scope not in ('fold', 'pooled'):
        raise ConfigError('THRESHOLD_SCOPE must be "fold" or "pooled"', stage='config')

    fusion_name = str(raw['FUSION']).lower()
    if fusion_name not in FUSION_NAMES:
        raise ConfigError('unknown fusion strategy {0!r}'.format(raw['FUSION']), stage='config')
    strategy = FUSION_NAMES[fusion_name]
    mode_name = raw['FEATURE_MODE']
    if mode_name is None:
        mode_name = 'global' if strategy is Strategy.DP_SELECT else 'local'
    try:
        mode = FeatureMode(str(mode_name).lower())
    except ValueError:
        raise ConfigError('FEATURE_MODE must be "local" or "global"', stage='config')

    categories = parse_categories(raw['CATEGORIES'])
    fusion = FusionSpec.validated(strategy, categories, mode, _number(raw, 'DP_FRACTION'))

    grid = tuple(float(c) for c in raw['C_GRID'])
    if not grid or any(c <= 0 for c in grid):
        raise ConfigError('C_GRID must hold positive values', stage='config')

    threads = _number(raw, 'THREADS', int)
    if threads < 1:
        raise ConfigError('THREADS must be at least 1', stage='config')

    inner = _number(raw, 'INNER_VALIDATION_FRACTION')
    if not 0 < inner < 1:
        raise ConfigError('INNER_VALIDATION_FRACTION must lie in (0, 1)', stage='config')
    dropout = _number(raw, 'MLP_DROPOUT')
    if not 0 <= dropout < 1:
        raise ConfigError('MLP_DROPOUT must lie in [0, 1)', stage='config')

    strict = bool(raw['STRICT_LEAKAGE'])
    if strict and scope == 'pooled' and tau_low is None:
        raise LeakageError('pooled labeling thresholds include the held-out user; '
                           'use THRESHOLD_SCOPE = "fold" with strict leakage checks', stage='config')

    for key in ('LOW_PERCENTILE', 'HIGH_PERCENTILE', 'MAX_MISSING_FRACTION', 'DP_FRACTION',
                'SVM_TOLERANCE', 'INNER_VALIDATION_FRACTION', 'MLP_LEARNING_RATE', 'MLP_DROPOUT'):
        raw[key] = _number(raw, key)
    for key in ('SVM_MAX_ITER', 'MLP_EPOCHS', 'SEED', 'THREADS'):
        raw[key] = _number(raw, key, int)
    raw['TAU_LOW'], raw['TAU_HIGH'] = tau_low, tau_high
    raw['STRICT_LEAKAGE'] = strict
    raw['EXHAUSTIVE_SUBSETS'] = bool(raw['EXHAUSTIVE_SUBSETS'])
    raw['DATA_FOLDER'] = str(raw['DATA_FOLDER'])
    raw['WINDOW_LENGTH'] = window
    raw['CATEGORIES'] = list(categories)
    raw['FUSION'] = fusion_name
    raw['FEATURE_MODE'] = mode.value
    raw['THRESHOLD_SCOPE'] = scope
    raw['C_GRID'] = list(grid)
    raw['NORMALIZE_CATEGORIES'] = list(parse_categories(raw['NORMALIZE_CATEGORIES'])) if raw['NORMALIZE_CATEGORIES'] else []

    return ExperimentConfig(
        data_folder=str(raw['DATA_FOLDER']),
        output_folder=str(raw['OUTPUT_FOLDER']),
        cache_folder=str(raw['CACHE_FOLDER']),
        window_length=window,
        low_percentile=low,
        high_percentile=high,
        tau_low=tau_low,
        tau_high=tau_high,
        max_missing_fraction=missing,
        threshold_scope=scope,
        fusion=fusion,
        c_grid=grid,
        svm_tolerance=raw['SVM_TOLERANCE'],
        svm_max_iter=raw['SVM_MAX_ITER'],
        inner_validation_fraction=inner,
        mlp_learning_rate=raw['MLP_LEARNING_RATE'],
        mlp_epochs=raw['MLP_EPOCHS'],
        mlp_dropout=dropout,
        normalize_categories=tuple(raw['NORMALIZE_CATEGORIES']),
        seed=raw['SEED'],
        threads=threads,
        strict_leakage=strict,
        exhaustive_subsets=bool(raw['EXHAUSTIVE_SUBSETS']),
        raw=raw,
    )

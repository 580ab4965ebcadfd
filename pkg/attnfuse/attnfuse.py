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

"""The main attnfuse class: configuration, plugins and pipeline stages."""

import io
import json
import os
import time
import typing

from yapsy.PluginManager import PluginManager

from . import DEBUG, SHOW_TRACEBACKS, utils
from .config import ExperimentConfig, build_config
from .dataset import FeatureBank, WindowSet, load_or_build_windows
from .evaluation import EvalReport, FoldModels, LoocvSettings, loocv, train_folds
from .log import LOGGER
from .plugin_categories import Command
from .state import CacheManifest

__all__ = ('AttnFuse',)


def _plugin_load_callback(plugin_info):
    """Set the plugin's module path."""
    try:
        plugin_info.plugin_object.set_module_path(plugin_info.path)
    except AttributeError:
        pass


class AttnFuse(object):
    """Class that handles experiment configuration and runs pipeline stages."""

    def __init__(self, **config):
        """Initialize the application from config file values.

        Keys starting with ``__`` carry run information (configuration file
        name, working directory) and are not settings.
        """
        self.debug = DEBUG
        self.show_tracebacks = SHOW_TRACEBACKS
        self.configuration_filename = config.get('__configuration_filename__')
        self.configured = bool(config.get('__configured__', self.configuration_filename))
        self.file_values = {k: v for k, v in config.items() if not k.startswith('__')}
        self.plugin_manager = None
        self._commands = {}
        self._plugin_places = [os.path.join(os.path.dirname(__file__), 'plugins')]

    def init_plugins(self):
        """Load the command plugins."""
        self.plugin_manager = PluginManager(categories_filter={
            "Command": Command,
        })
        self.plugin_manager.getPluginLocator().setPluginInfoExtension('plugin')
        self.plugin_manager.getPluginLocator().setPluginPlaces(self._plugin_places)
        self.plugin_manager.locatePlugins()
        self.plugin_manager.loadPlugins(callback_after=_plugin_load_callback)

        self._commands = {}
        for plugin_info in self.plugin_manager.getPluginsOfCategory("Command"):
            self.plugin_manager.activatePluginByName(plugin_info.name)
            plugin_info.plugin_object.set_site(self)
            plugin_info.plugin_object.short_help = plugin_info.description
            self._commands[plugin_info.name] = plugin_info.plugin_object
        return self._commands

    def experiment(self, overrides=None) -> ExperimentConfig:
        """Validated configuration: defaults, then file values, then ``overrides``."""
        return build_config(self.file_values, overrides)

    def windows(self, config: ExperimentConfig, refresh: bool = False) -> WindowSet:
        """Labeled windows for ``config``, from the cache when possible."""
        window_set, _ = load_or_build_windows(config, refresh)
        return window_set

    def feature_bank(self, config: ExperimentConfig, window_set: WindowSet) -> FeatureBank:
        """Features of the configured categories for every window."""
        return FeatureBank.build(window_set.windows, config.fusion.categories, config.feature_mode)

    @staticmethod
    def models_folder(config: ExperimentConfig) -> str:
        return os.path.join(config.cache_folder, 'models-{0}'.format(config.config_hash[:16]))

    def train(self, config: ExperimentConfig, refresh: bool = False) -> typing.Dict[str, FoldModels]:
        """Train the models of every fold and store them in the cache."""
        window_set = self.windows(config, refresh)
        bank = self.feature_bank(config, window_set)
        settings = LoocvSettings.from_config(config)
        models = train_folds(bank, config.fusion, settings, window_set.thresholds, window_set.users())
        folder = self.models_folder(config)
        for user_id, fold in models.items():
            utils.dump_json(fold, os.path.join(folder, 'fold-{0}.json'.format(user_id)))
        CacheManifest(config.cache_folder).record('models', config.config_hash, folder, users=list(models))
        LOGGER.info('trained {0} folds into {1}'.format(len(models), folder))
        return models

    def load_models(self, config: ExperimentConfig) -> typing.Dict[str, FoldModels]:
        """Fold models stored by ``train`` for this configuration, if any."""
        folder = CacheManifest(config.cache_folder).lookup('models', config.config_hash)
        if folder is None:
            return {}
        models = {}
        for name in sorted(os.listdir(folder)):
            if not (name.startswith('fold-') and name.endswith('.json')):
                continue
            with io.open(os.path.join(folder, name), 'r', encoding='utf-8') as inf:
                fold = FoldModels.from_dict(json.load(inf))
            models[fold.held_out_user] = fold
        LOGGER.info('using {0} trained folds from {1}'.format(len(models), folder))
        return models

    def evaluate(self, config: ExperimentConfig, refresh: bool = False) -> typing.Tuple[EvalReport, dict]:
        """Run leave-one-user-out evaluation; returns the report and stage timings."""
        timing = {}
        start = time.perf_counter()
        window_set = self.windows(config, refresh)
        timing['windows'] = time.perf_counter() - start

        mark = time.perf_counter()
        bank = self.feature_bank(config, window_set)
        timing['features'] = time.perf_counter() - mark

        mark = time.perf_counter()
        settings = LoocvSettings.from_config(config)
        fold_models = {} if refresh else self.load_models(config)
        report = loocv(bank, config.fusion, config.seed, settings, window_set.thresholds,
                       window_set.users(), fold_models)
        timing['folds'] = time.perf_counter() - mark
        timing['total'] = time.perf_counter() - start

        report.window_length = config.window_length
        report.candidates = window_set.header.get('candidates')
        report.config = config.echo()
        report.config_hash = config.config_hash
        return report, timing

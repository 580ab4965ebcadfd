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

"""attnfuse plugin categories."""

import logging
import sys
import traceback
import typing

from doit.cmd_base import Command as DoitCommand
from yapsy.IPlugin import IPlugin

from .errors import AttnfuseError
from .log import LOGGER, get_logger

if typing.TYPE_CHECKING:
    import attnfuse

__all__ = (
    'Command',
    'PipelineCommand',
    'PIPELINE_OPTIONS',
)


class BasePlugin(IPlugin):
    """Base plugin class."""

    logger = None

    def set_site(self, site: 'attnfuse.AttnFuse'):
        """Set site, which is an AttnFuse instance."""
        self.site = site
        self.logger = get_logger('attnfuse.' + self.name)
        if not site.debug:
            self.logger.level = logging.INFO

    def set_module_path(self, module_path):
        """Set the plugin's module path."""
        self.module_path = module_path


class Command(BasePlugin, DoitCommand):
    """Doit command implementation."""

    name = "dummy_command"

    doc_purpose = "A short explanation."
    doc_usage = ""
    doc_description = None  # None value will completely omit line from doc
    cmd_options = ()
    needs_config = False

    def __init__(self, *args, **kwargs):
        """Initialize a command."""
        BasePlugin.__init__(self, *args, **kwargs)
        DoitCommand.__init__(self)

    def __call__(self, config=None, **kwargs):
        """Reset doit arguments (workaround)."""
        self._doitargs = kwargs
        DoitCommand.__init__(self, config, **kwargs)
        return self

    def execute(self, options=None, args=None) -> int:
        """Run _execute, turning attnfuse errors into exit codes."""
        options = options or {}
        args = args or []

        if self.needs_config and not self.site.configured:
            LOGGER.error("This command needs an attnfuse.toml (or --conf=PATH).")
            return 1
        try:
            return self._execute(options, args) or 0
        except AttnfuseError as exc:
            LOGGER.error(exc.describe())
            if self.site.debug or self.site.show_tracebacks:
                LOGGER.error(''.join(traceback.format_exception(*sys.exc_info())))
            return exc.exit_code

    def _execute(self, options, args) -> int:
        """Do whatever this command does.

        @param options (dict) with values from cmd_options
        @param args (list) list of positional arguments
        """
        raise NotImplementedError()


def _option(name, help, type=str, short='', inverse=None):
    option = {
        'name': name,
        'long': name.replace('_', '-'),
        'short': short,
        'default': None,
        'type': type,
        'help': help,
    }
    if inverse:
        option['inverse'] = inverse
    return option


# name -> config key; values are validated by build_config, so a bad value
# is a configuration error rather than a command line parse error.
PIPELINE_OPTIONS = (
    ('data', 'DATA_FOLDER', _option('data', "Dataset folder.")),
    ('output', 'OUTPUT_FOLDER', _option('output', "Folder for report files.", short='o')),
    ('cache', 'CACHE_FOLDER', _option('cache', "Cache folder.")),
    ('window', 'WINDOW_LENGTH', _option('window', "Window length in seconds: 30, 60 or 120.", short='w')),
    ('low_percentile', 'LOW_PERCENTILE', _option('low_percentile', "Percentile below which windows are Low.")),
    ('high_percentile', 'HIGH_PERCENTILE', _option('high_percentile', "Percentile above which windows are High.")),
    ('tau_low', 'TAU_LOW', _option('tau_low', "Explicit Low attention threshold.")),
    ('tau_high', 'TAU_HIGH', _option('tau_high', "Explicit High attention threshold.")),
    ('threshold_scope', 'THRESHOLD_SCOPE', _option('threshold_scope', "Label thresholds per fold or pooled.")),
    ('feature_mode', 'FEATURE_MODE', _option('feature_mode', "Window features: local or global.")),
    ('fusion', 'FUSION', _option('fusion', "Fusion strategy: sum, nn, dp or none.", short='f')),
    ('categories', 'CATEGORIES', _option('categories', "Comma separated categories, e.g. EB,Exp.", short='c')),
    ('fraction', 'DP_FRACTION', _option('fraction', "Fraction of features kept by DP selection.")),
    ('seed', 'SEED', _option('seed', "Master random seed.", short='s')),
    ('threads', 'THREADS', _option('threads', "Worker threads.", short='j')),
    ('strict_leakage', 'STRICT_LEAKAGE', _option('strict_leakage', "Fail when held-out data could reach training.",
                                                type=bool, inverse='no-strict-leakage')),
    ('exhaustive', 'EXHAUSTIVE_SUBSETS', _option('exhaustive', "Also evaluate every category subset.",
                                                 type=bool, inverse='no-exhaustive')),
)

LOGGING_OPTIONS = (
    {
        'name': 'strict',
        'long': 'strict',
        'default': False,
        'type': bool,
        'help': "Fail on things that would normally be warnings.",
    },
    {
        'name': 'quiet',
        'long': 'quiet',
        'short': 'q',
        'default': False,
        'type': bool,
        'help': "Run quietly.",
    },
)


class PipelineCommand(Command):
    """A command that runs pipeline stages for an experiment configuration."""

    pipeline_options = tuple(name for name, _, _ in PIPELINE_OPTIONS)
    extra_options = ()

    def __init__(self, *args, **kwargs):
        """Declare the shared pipeline options."""
        self.cmd_options = tuple(o for name, _, o in PIPELINE_OPTIONS if name in self.pipeline_options) + \
            tuple(self.extra_options) + LOGGING_OPTIONS
        super().__init__(*args, **kwargs)

    def overrides(self, options) -> dict:
        """Config keys set on the command line."""
        return {key: options.get(name) for name, key, _ in PIPELINE_OPTIONS if options.get(name) is not None}

    def experiment(self, options):
        """Validated configuration: file values overridden by flags."""
        config = self.site.experiment(self.overrides(options))
        LOGGER.debug("config hash {0}".format(config.config_hash))
        return config

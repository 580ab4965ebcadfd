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

"""Generate a synthetic dataset."""

import os

from attnfuse import utils
from attnfuse.errors import ConfigError
from attnfuse.plugin_categories import Command
from attnfuse.synth import SynthSpec, generate


class CommandSynth(Command):
    """Generate a synthetic dataset."""

    name = "synth"

    doc_usage = "[options] [--spec=SETTINGS.toml]"
    doc_purpose = "generate a synthetic dataset with known ground truth"
    doc_description = (
        "Writes frame features, attention files (and landmarks with --landmarks) "
        "in the dataset layout read by the other commands, plus truth.json with "
        "the Bayes accuracy of every category. Identical settings and seed give "
        "identical files.")
    needs_config = False
    cmd_options = [
        {
            'name': 'output',
            'long': 'output',
            'short': 'o',
            'default': 'data',
            'type': str,
            'help': "Dataset folder to write.",
        },
        {
            'name': 'spec',
            'long': 'spec',
            'default': None,
            'type': str,
            'help': "TOML or JSON file with generator settings.",
        },
        {
            'name': 'seed',
            'long': 'seed',
            'short': 's',
            'default': 0,
            'type': int,
            'help': "Master random seed.",
        },
        {
            'name': 'users',
            'long': 'users',
            'short': 'u',
            'default': None,
            'type': int,
            'help': "Number of users.",
        },
        {
            'name': 'seconds',
            'long': 'seconds',
            'default': None,
            'type': int,
            'help': "Session length in seconds (shortest length with --seconds-max).",
        },
        {
            'name': 'seconds_max',
            'long': 'seconds-max',
            'default': None,
            'type': int,
            'help': "Longest session length; lengths are drawn in between.",
        },
        {
            'name': 'frame_rate',
            'long': 'frame-rate',
            'default': None,
            'type': float,
            'help': "Frames per second.",
        },
        {
            'name': 'landmarks',
            'long': 'landmarks',
            'default': None,
            'type': bool,
            'help': "Write EAR, HS and NS as landmark files.",
        },
        {
            'name': 'threads',
            'long': 'threads',
            'short': 'j',
            'default': 1,
            'type': int,
            'help': "Users generated in parallel.",
        },
    ]

    def _execute(self, options, args):
        """Generate the dataset."""
        settings = {}
        if options.get('spec'):
            if not os.path.exists(options['spec']):
                raise ConfigError('cannot find generator settings {0!r}'.format(options['spec']), stage='synth')
            settings = utils.load_data(options['spec'])
            if settings is None:
                raise ConfigError('unsupported settings format {0!r}'.format(options['spec']), stage='synth')
        for name, key in (('users', 'n_users'), ('seconds', 'session_seconds'),
                          ('seconds_max', 'session_seconds_max'), ('frame_rate', 'frame_rate'),
                          ('landmarks', 'landmarks')):
            if options.get(name) is not None:
                settings[key] = options[name]
        spec = SynthSpec.from_dict(settings)
        result = generate(spec, options['seed'], options['output'], options['threads'])
        for category, accuracy in result.truth['bayes_accuracy'].items():
            if accuracy['60'] is None:
                self.logger.warning('{0}: no labeled windows of both classes at 60 s'.format(category))
            else:
                self.logger.info('{0}: Bayes accuracy {1:.4f} at 60 s'.format(category, accuracy['60']))
        return 0

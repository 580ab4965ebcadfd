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

"""Render comparison tables from evaluation reports."""

import io
import os

from attnfuse import utils
from attnfuse.errors import ConfigError
from attnfuse.plugin_categories import Command
from attnfuse.reporting import load_report, render_comparison

METRICS = {
    'oracle': 'oracle_accuracy',
    'held-out': 'held_out_accuracy',
    'auc': 'auc',
}


class CommandReport(Command):
    """Render comparison tables from evaluation reports."""

    name = "report"

    doc_usage = "[--metric=oracle|held-out|auc] [-o FILE] REPORT [REPORT ...]"
    doc_purpose = "render a comparison table from evaluation reports"
    doc_description = (
        "Reads report.json files (or folders holding one) and prints one row "
        "per configuration and one column per window length. Without "
        "arguments the configured output folder is used.")
    cmd_options = [
        {
            'name': 'metric',
            'long': 'metric',
            'short': 'm',
            'default': 'oracle',
            'type': str,
            'help': "Metric to tabulate: oracle, held-out or auc.",
        },
        {
            'name': 'output',
            'long': 'output',
            'short': 'o',
            'default': None,
            'type': str,
            'help': "Also write the table to this file.",
        },
    ]

    def _execute(self, options, args):
        """Print the comparison table."""
        metric = METRICS.get(options.get('metric', 'oracle'))
        if metric is None:
            raise ConfigError('unknown metric {0!r} (expected one of {1})'.format(
                options['metric'], ', '.join(METRICS)), stage='report')
        paths = list(args) or [self.site.experiment().output_folder]
        table = render_comparison([load_report(p) for p in paths], metric)
        print(table, end='')
        if options.get('output'):
            utils.makedirs(os.path.dirname(options['output']))
            with io.open(options['output'], 'w', encoding='utf-8') as outf:
                outf.write(table)
        return 0

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

"""Cut and label windows."""

from attnfuse.dataset import load_or_build_windows, window_cache_path
from attnfuse.plugin_categories import PipelineCommand

REFRESH = {
    'name': 'refresh',
    'long': 'refresh',
    'default': False,
    'type': bool,
    'help': "Ignore cached results and rebuild them.",
}


class CommandWindows(PipelineCommand):
    """Cut and label windows."""

    name = "windows"

    doc_usage = "[options]"
    doc_purpose = "cut and label windows, filling the window cache"
    doc_description = (
        "Loads every session of the dataset, averages frames per second, cuts "
        "one window per start second and keeps the ones labeled High or Low. "
        "The windows are written as JSON Lines into the cache folder.")
    pipeline_options = ('data', 'cache', 'window', 'low_percentile', 'high_percentile', 'tau_low', 'tau_high',
                        'threshold_scope', 'threads', 'strict_leakage')
    extra_options = (REFRESH,)

    def _execute(self, options, args):
        """Build or reuse the window dump and print its counts."""
        config = self.experiment(options)
        window_set, from_cache = load_or_build_windows(config, options.get('refresh', False))
        counts = window_set.counts()
        print('{0} windows ({1} High, {2} Low) in {3}{4}'.format(
            counts['total'], counts['per_label']['High'], counts['per_label']['Low'],
            window_cache_path(config), ' (cached)' if from_cache else ''))
        low, high = window_set.thresholds.pooled
        print('pooled label thresholds: Low <= {0:.3f}, High >= {1:.3f}'.format(low, high))
        for user_id, n in counts['per_user'].items():
            print('  {0:12s} {1}'.format(user_id, n))
        return 0

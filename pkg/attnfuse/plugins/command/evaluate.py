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

"""Run leave-one-user-out evaluation."""

from attnfuse.plugin_categories import PipelineCommand
from attnfuse.reporting import write_report

from attnfuse.plugins.command.windows import REFRESH


class CommandEvaluate(PipelineCommand):
    """Run leave-one-user-out evaluation."""

    name = "evaluate"

    doc_usage = "[options]"
    doc_purpose = "run leave-one-user-out evaluation and write the report"
    doc_description = (
        "Writes report.json, summary.txt, roc.csv, scores.csv and timing.json "
        "into the output folder. report.json holds no timing, so equal "
        "settings and seed give identical reports.")
    extra_options = (REFRESH,)

    def _execute(self, options, args):
        """Evaluate and write the report files."""
        config = self.experiment(options)
        report, timing = self.site.evaluate(config, options.get('refresh', False))
        paths = write_report(report, config.output_folder, timing)
        with open(paths['summary'], encoding='utf-8') as inf:
            print(inf.read(), end='')
        self.logger.info('report written to {0}'.format(paths['report']))
        return 0

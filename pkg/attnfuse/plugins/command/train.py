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

"""Train fold models."""

from attnfuse.plugin_categories import PipelineCommand

from attnfuse.plugins.command.windows import REFRESH


class CommandTrain(PipelineCommand):
    """Train fold models."""

    name = "train"

    doc_usage = "[options]"
    doc_purpose = "train the models of every leave-one-user-out fold"
    doc_description = (
        "Trains, for every user, the category classifiers and the fusion model "
        "on the other users. The models are stored in the cache folder and "
        "reused by `evaluate` with the same settings.")
    extra_options = (REFRESH,)

    def _execute(self, options, args):
        """Train and store the fold models."""
        config = self.experiment(options)
        models = self.site.train(config, options.get('refresh', False))
        print('{0} folds trained into {1}'.format(len(models), self.site.models_folder(config)))
        return 0

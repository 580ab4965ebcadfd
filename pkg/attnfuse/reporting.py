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

"""Report files: JSON report, text summary, ROC and score CSVs, comparison tables."""

import csv
import io
import json
import os
import typing

import natsort

from . import utils
from .errors import ConfigError

__all__ = (
    'REPORT_FILES',
    'write_report',
    'load_report',
    'render_summary',
    'configuration_label',
    'comparison_rows',
    'render_comparison',
)

REPORT_FILES = {
    'report': 'report.json',
    'summary': 'summary.txt',
    'roc': 'roc.csv',
    'scores': 'scores.csv',
    'timing': 'timing.json',
}


def _percent(value) -> str:
    if value is None:
        return '-'
    return '{0:.2f}'.format(100.0 * value)


def _decimal(value) -> str:
    if value is None:
        return '-'
    return '{0:.4f}'.format(value)


def _number(value) -> str:
    if value is None:
        return '-'
    if isinstance(value, str):
        return value
    return '{0:.4f}'.format(value)


def _table(header, rows) -> typing.List[str]:
    """Left-aligned plain text table."""
    cells = [list(header)] + [[str(c) for c in row] for row in rows]
    widths = [max(len(row[k]) for row in cells) for k in range(len(header))]
    lines = []
    for n, row in enumerate(cells):
        lines.append('  '.join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
        if n == 0:
            lines.append('  '.join('-' * w for w in widths))
    return lines


def render_summary(data: dict) -> str:
    """Plain text summary of a report dictionary."""
    fusion = data['fusion']
    pooled = data['pooled']
    lines = [
        'fusion:        {0} ({1} features)'.format(fusion['strategy'], fusion['feature_mode']),
        'categories:    {0}'.format(', '.join(fusion['categories'])),
        'window length: {0} s'.format(data.get('window_length')),
        'seed:          {0}'.format(data['seed']),
        'config hash:   {0}'.format(data.get('config_hash')),
        '',
        'pooled windows:            {0}'.format(pooled['n_windows']),
        'oracle threshold accuracy: {0} % (threshold {1})'.format(
            _percent(pooled['oracle_accuracy']), _number(pooled['oracle_threshold'])),
        'held-out accuracy:         {0} %'.format(_percent(pooled['held_out_accuracy'])),
        'AUC:                       {0}'.format(_number(pooled['auc'])),
        'mean per-user accuracy:    {0} % (oracle {1} %)'.format(
            _percent(data['mean_user_accuracy']), _percent(data['mean_user_oracle_accuracy'])),
        '',
    ]
    windows = data['windows']
    reference = windows.get('reference_count')
    lines.append('labeled windows: {0} High, {1} Low{2}'.format(
        windows['per_label']['High'], windows['per_label']['Low'],
        ' (reference {0})'.format(reference) if reference else ''))
    lines.append('')

    rows = [(user, u['n_windows'], _percent(u['accuracy']), _percent(u['oracle_accuracy']), _number(u['auc']))
            for user, u in natsort.natsorted(data['per_user'].items())]
    lines.extend(_table(('user', 'windows', 'held-out %', 'oracle %', 'AUC'), rows))
    lines.append('')

    rows = [(c, _percent(u['held_out_accuracy']), _percent(u['oracle_accuracy']), _number(u['auc']))
            for c, u in data['unimodal'].items()]
    lines.extend(_table(('category', 'held-out %', 'oracle %', 'AUC'), rows))

    if data.get('dp'):
        dp = data['dp']
        lines.append('')
        lines.append('DP selection: {0} of {1} features (fraction {2})'.format(
            dp['n_selected'], dp['n_features'], dp['fraction']))
        totals = {}
        for fold in dp['per_fold'].values():
            for category, count in fold['per_category'].items():
                totals[category] = totals.get(category, 0) + count
        n_folds = max(1, len(dp['per_fold']))
        rows = [(c, '{0:.1f}'.format(count / n_folds)) for c, count in totals.items()]
        lines.extend(_table(('category', 'selected per fold'), rows))

    if data.get('subsets'):
        lines.append('')
        rows = [('+'.join(s['categories']), _percent(s['held_out_accuracy']), _percent(s['oracle_accuracy']),
                 _number(s['auc'])) for s in data['subsets']]
        lines.extend(_table(('subset', 'held-out %', 'oracle %', 'AUC'), rows))

    if data.get('skipped_folds'):
        lines.append('')
        for skipped in data['skipped_folds']:
            lines.append('skipped fold {0}: {1}'.format(skipped['user_id'], skipped['reason']))
    return '\n'.join(lines) + '\n'


def _write_csv(path, header, rows):
    with io.open(path, 'w', encoding='utf-8', newline='') as outf:
        writer = csv.writer(outf, lineterminator='\n')
        writer.writerow(header)
        writer.writerows(rows)


def write_report(report, folder, timing: typing.Optional[dict] = None) -> typing.Dict[str, str]:
    """Write every report file of an ``EvalReport`` into ``folder``.

    Returns the written paths by kind.
    """
    utils.makedirs(folder)
    paths = {kind: os.path.join(folder, name) for kind, name in REPORT_FILES.items()}
    data = report.as_dict()
    utils.dump_json(data, paths['report'])
    with io.open(paths['summary'], 'w', encoding='utf-8') as outf:
        outf.write(render_summary(data))
    _write_csv(paths['roc'], ('fpr', 'tpr'),
               ((utils.format_number(f), utils.format_number(t)) for f, t in report.roc_points()))
    _write_csv(paths['scores'], ('window_id', 'category', 'raw', 'normalized', 'fused', 'label'),
               ((w, c, repr(r), repr(n), repr(f), label) for w, c, r, n, f, label in report.score_rows()))
    if timing is None:
        del paths['timing']
    else:
        utils.dump_json(timing, paths['timing'])
    return paths


def load_report(path) -> dict:
    """Load a report JSON file, or ``report.json`` inside a folder."""
    if os.path.isdir(path):
        path = os.path.join(path, REPORT_FILES['report'])
    try:
        with io.open(path, 'r', encoding='utf-8') as inf:
            data = json.load(inf)
    except (OSError, ValueError) as exc:
        raise ConfigError('cannot read report {0!r}: {1}'.format(path, exc), stage='report')
    if 'pooled' not in data or 'fusion' not in data:
        raise ConfigError('{0!r} is not an evaluation report'.format(path), stage='report')
    return data


def configuration_label(data: dict) -> str:
    """Row label of a report: strategy, feature mode and categories."""
    fusion = data['fusion']
    label = '{0} {1} {2}'.format(fusion['strategy'], fusion['feature_mode'], '+'.join(fusion['categories']))
    if fusion['strategy'] == 'dp':
        label += ' ({0:g})'.format(fusion['dp_fraction'])
    return label


def comparison_rows(reports: typing.Sequence[dict], metric: str = 'oracle_accuracy'):
    """Rows (label, {window length: value}) and the sorted window lengths.

    A later report replaces an earlier one with the same label and window.
    """
    table = {}
    windows = set()
    for data in reports:
        label = configuration_label(data)
        window = data.get('window_length')
        windows.add(window)
        table.setdefault(label, {})[window] = data['pooled'][metric]
    order = sorted(windows, key=lambda w: (w is None, w or 0))
    return [(label, table[label]) for label in sorted(table)], order


def render_comparison(reports: typing.Sequence[dict], metric: str = 'oracle_accuracy') -> str:
    """Text table with one row per configuration and one column per window length.

    Accuracies print as percentages, AUC as a plain 0-1 decimal.
    """
    if not reports:
        raise ConfigError('no reports to compare', stage='report')
    rows, windows = comparison_rows(reports, metric)
    header = ['configuration'] + ['{0} s'.format(w) for w in windows]
    cell = _decimal if metric == 'auc' else _percent
    body = [[label] + [cell(values.get(w)) for w in windows] for label, values in rows]
    return '\n'.join(_table(header, body)) + '\n'

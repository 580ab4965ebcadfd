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

"""Per-second averaging, sliding windows and high/low attention labels."""

import dataclasses
import enum
import io
import json
import math
import os
import typing

import natsort
import numpy as np

from .errors import (ConfigError, DegenerateDistribution, EmptySession, EmptyStream,
                     MalformedRow, SessionSpanMismatch, WindowLongerThanSession)
from .ingest import AttentionSeries, CATEGORIES, FeatureTrack
from .log import stage_logger
from .utils import CustomEncoder, makedirs

__all__ = (
    'Label',
    'LabelingConfig',
    'SecondFeatureSeries',
    'WindowSample',
    'per_second_average',
    'compute_label_thresholds',
    'extract_windows',
    'label_for',
    'relabel',
    'candidate_count',
    'sort_windows',
    'dump_windows',
    'load_windows',
)

LOGGER = stage_logger('window')


class Label(enum.Enum):
    """Attention class of a window."""

    LOW = 'Low'
    HIGH = 'High'

    @property
    def sign(self) -> int:
        """Return +1 for High and -1 for Low."""
        return 1 if self is Label.HIGH else -1


@dataclasses.dataclass(frozen=True)
class LabelingConfig:
    """How windows are cut and labeled."""

    window_length: int = 60
    low_percentile: float = 10.0
    high_percentile: float = 90.0
    max_missing_fraction: float = 0.1

    def __post_init__(self):
        if self.window_length < 1:
            raise ConfigError('window length must be at least 1 s', stage='window')
        if not 0 < self.low_percentile < self.high_percentile < 100:
            raise ConfigError('percentiles must satisfy 0 < low < high < 100', stage='window')
        if not 0 <= self.max_missing_fraction <= 1:
            raise ConfigError('missing fraction must lie in [0, 1]', stage='window')

    @classmethod
    def from_config(cls, config):
        """Build from an ``ExperimentConfig``."""
        return cls(config.window_length, config.low_percentile, config.high_percentile,
                   config.max_missing_fraction)


@dataclasses.dataclass(frozen=True, eq=False)
class SecondFeatureSeries:
    """Per-second means of one category: ``matrix`` is N x T.

    ``counts`` holds the valid frames per second; seconds without any are
    ``missing`` and carry the last observed value.
    """

    user_id: str
    session_id: str
    category: str
    matrix: np.ndarray
    counts: np.ndarray
    missing: np.ndarray

    @property
    def seconds(self) -> int:
        return self.matrix.shape[1]


@dataclasses.dataclass(frozen=True, eq=False)
class WindowSample:
    """One labeled window: local vectors per category and its band attention."""

    user_id: str
    session_id: str
    start_second: int
    local: typing.Dict[str, np.ndarray]
    label: Label
    band_attention: float
    missing_fraction: float = 0.0

    @property
    def window_id(self) -> str:
        return '{0}/{1}/{2}'.format(self.user_id, self.session_id, self.start_second)

    @property
    def length(self) -> int:
        return next(iter(self.local.values())).shape[1]

    def as_dict(self):
        return {
            'user_id': self.user_id,
            'session_id': self.session_id,
            'start_second': self.start_second,
            'label': self.label.value,
            'band_attention': self.band_attention,
            'missing_fraction': self.missing_fraction,
            'local': {c: self.local[c] for c in CATEGORIES if c in self.local},
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            user_id=data['user_id'],
            session_id=data['session_id'],
            start_second=int(data['start_second']),
            local={c: np.array(v, dtype=float) for c, v in data['local'].items()},
            label=Label(data['label']),
            band_attention=float(data['band_attention']),
            missing_fraction=float(data.get('missing_fraction', 0.0)),
        )


def per_second_average(track: FeatureTrack, n_seconds: typing.Optional[int] = None) -> SecondFeatureSeries:
    """Average the valid frames of a track over each second [t, t+1).

    ``n_seconds`` defaults to the second of the last frame plus one; frames
    past it are ignored. Empty seconds repeat the last observed value (the
    first observed one before any observation) and are marked missing.
    """
    valid = np.asarray(track.valid, dtype=bool)
    if not valid.any():
        raise EmptySession('no valid {0} frames'.format(track.category), stage='window',
                           record='{0}/{1}'.format(track.user_id, track.session_id))
    timestamps = np.asarray(track.timestamps, dtype=float)[valid]
    values = np.asarray(track.values, dtype=float)[valid]
    seconds = np.floor(timestamps).astype(int)
    if n_seconds is None:
        n_seconds = int(seconds.max()) + 1
    inside = seconds < n_seconds
    seconds, values = seconds[inside], values[inside]
    if len(seconds) == 0:
        raise EmptySession('no valid {0} frames in the first {1} s'.format(track.category, n_seconds),
                           stage='window', record='{0}/{1}'.format(track.user_id, track.session_id))

    counts = np.bincount(seconds, minlength=n_seconds)
    sums = np.zeros((n_seconds, values.shape[1]))
    np.add.at(sums, seconds, values)
    missing = counts == 0
    observed = np.flatnonzero(~missing)
    # index of the last observed second at or before each second
    last = np.maximum.accumulate(np.where(missing, -1, np.arange(n_seconds)))
    last = np.where(last < 0, observed[0], last)
    means = sums[last] / counts[last][:, None]
    return SecondFeatureSeries(track.user_id, track.session_id, track.category,
                               means.T.copy(), counts, missing)


def compute_label_thresholds(pool, config: LabelingConfig) -> typing.Tuple[float, float]:
    """Return the low and high attention thresholds as percentiles of ``pool``.

    Percentiles interpolate linearly between order statistics.
    """
    values = np.concatenate([np.ravel(np.asarray(p, dtype=float)) for p in pool]) \
        if isinstance(pool, (list, tuple)) else np.ravel(np.asarray(pool, dtype=float))
    if values.size == 0:
        raise EmptyStream('no attention values to compute thresholds from', stage='window')
    tau_low, tau_high = np.percentile(values, [config.low_percentile, config.high_percentile])
    tau_low, tau_high = float(tau_low), float(tau_high)
    if not tau_low < tau_high:
        raise DegenerateDistribution('low and high thresholds coincide at {0!r}'.format(tau_low),
                                     stage='window')
    return tau_low, tau_high


def label_for(band_attention: float, thresholds) -> typing.Optional[Label]:
    """Return the label for a band attention level, or None between thresholds."""
    tau_low, tau_high = thresholds
    if band_attention <= tau_low:
        return Label.LOW
    if band_attention >= tau_high:
        return Label.HIGH
    return None


def candidate_count(seconds: int, window_length: int) -> int:
    """Number of 1 s stride windows in a session."""
    return max(seconds - window_length + 1, 0)


def extract_windows(series: typing.Mapping[str, SecondFeatureSeries], attention: AttentionSeries,
                    config: LabelingConfig, thresholds) -> typing.List[WindowSample]:
    """Cut the labeled windows of one session.

    Every start second gives a candidate; it is kept when its band attention
    (mean attention over the window) is labeled and at most
    ``max_missing_fraction`` of its seconds are missing in any category.
    """
    total = attention.seconds
    length = config.window_length
    for category, s in series.items():
        if s.seconds != total:
            raise SessionSpanMismatch('{0} covers {1} s, attention covers {2} s'.format(
                category, s.seconds, total), stage='window',
                record='{0}/{1}'.format(attention.user_id, attention.session_id))
    if length > total:
        raise WindowLongerThanSession('{0} s window in a {1} s session'.format(length, total),
                                      stage='window', record='{0}/{1}'.format(
                                          attention.user_id, attention.session_id))

    count = candidate_count(total, length)
    csum = np.concatenate([[0.0], np.cumsum(attention.values)])
    band = (csum[length:] - csum[:-length]) / length
    missing = np.zeros(total, dtype=bool)
    for s in series.values():
        missing |= s.missing
    mcsum = np.concatenate([[0], np.cumsum(missing)])
    missing_fraction = (mcsum[length:] - mcsum[:-length]) / length

    windows = []
    ordered = [c for c in CATEGORIES if c in series]
    for start in range(count):
        label = label_for(band[start], thresholds)
        if label is None or missing_fraction[start] > config.max_missing_fraction:
            continue
        windows.append(WindowSample(
            user_id=attention.user_id,
            session_id=attention.session_id,
            start_second=start,
            local={c: series[c].matrix[:, start:start + length] for c in ordered},
            label=label,
            band_attention=float(band[start]),
            missing_fraction=float(missing_fraction[start]),
        ))
    return windows


def relabel(windows: typing.Iterable[WindowSample], thresholds) -> typing.List[WindowSample]:
    """Label windows under other thresholds, dropping the ones left unlabeled."""
    result = []
    for w in windows:
        label = label_for(w.band_attention, thresholds)
        if label is None:
            continue
        result.append(w if label is w.label else dataclasses.replace(w, label=label))
    return result


def sort_windows(windows: typing.Iterable[WindowSample]) -> typing.List[WindowSample]:
    """Order windows by (user, session, start second), users naturally sorted."""
    key = natsort.natsort_keygen()
    return sorted(windows, key=lambda w: (key(w.user_id), key(w.session_id), w.start_second))


def dump_windows(windows: typing.Iterable[WindowSample], path, header: dict) -> None:
    """Write windows as JSON Lines, the header object first."""
    makedirs(os.path.dirname(str(path)))
    tmp = str(path) + '.tmp'
    with io.open(tmp, 'w', encoding='utf-8') as outf:
        outf.write(json.dumps(header, cls=CustomEncoder, sort_keys=True) + '\n')
        for w in windows:
            outf.write(json.dumps(w, cls=CustomEncoder, sort_keys=True) + '\n')
    os.replace(tmp, path)


def load_windows(path) -> typing.Tuple[dict, typing.List[WindowSample]]:
    """Read a JSON Lines window dump; returns (header, windows)."""
    windows = []
    header = None
    with io.open(path, 'r', encoding='utf-8') as inf:
        for line, text in enumerate(inf, start=1):
            if not text.strip():
                continue
            try:
                data = json.loads(text)
                if header is None:
                    header = data
                else:
                    windows.append(WindowSample.from_dict(data))
            except (ValueError, KeyError, TypeError) as exc:
                raise MalformedRow('bad window record: {0}'.format(exc), str(path), line, stage='window')
    if header is None:
        raise EmptyStream('empty window dump', stage='window', record=str(path))
    for w in windows:
        if not all(math.isfinite(v) for v in (w.band_attention, w.missing_fraction)):
            raise MalformedRow('non-finite band attention', str(path), stage='window')
    return header, windows

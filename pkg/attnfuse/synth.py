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

"""Synthetic datasets with a known generative model.

Attention follows a mean-reverting random walk clipped to [0, 100]. Every
frame value of a category is::

    mean + coupling * side(t) + noise * N(0, 1)

where ``side(t)`` is +1 while the attention of the frame's second is at
least 50 and -1 below it; eye blink values are clipped to [0, 1]. A window
whose seconds all lie on one side holds ``frame_rate * window_length``
frames per channel, so the best classifier of one category reaches
``Phi(|coupling| * sqrt(n) / noise)`` there, with ``n`` the frame count over
all channels. Real windows straddle the midpoint and are labeled by
attention percentiles, so ``truth.json`` also carries a Monte Carlo estimate
on the generated attention itself.
"""

import concurrent.futures
import dataclasses
import math
import os
import typing

import numpy as np
from scipy import stats

from . import utils
from .dataset import DatasetLayout
from .errors import DegenerateDistribution, InvalidSpec
from .evaluation import max_accuracy_threshold
from .ingest import (CATEGORIES, CATEGORY_DIMENSIONS, N_POINTS, AttentionSeries, FeatureTrack,
                     FrameFeatureStream, LandmarkFrame, write_attention, write_frame_features,
                     write_landmarks)
from .log import stage_logger
from .window import LabelingConfig, compute_label_thresholds

__all__ = (
    'CategorySignal',
    'SynthSpec',
    'SynthResult',
    'SessionTrace',
    'bayes_accuracy',
    'combined_bayes_accuracy',
    'attention_walk',
    'session_traces',
    'monte_carlo_accuracy',
    'truth_for',
    'generate',
)

LOGGER = stage_logger('synth')

TRUTH_WINDOWS = (30, 60, 120)
LANDMARK_CATEGORIES = ('EAR', 'HS', 'NS')
# attention value splitting the two sides of the coupling
MIDPOINT = 50.0
# fresh noise draws per session for the ground truth estimate
TRUTH_REPLICATES = 10


@dataclasses.dataclass(frozen=True)
class CategorySignal:
    """Per-frame model of one category; all channels share it."""

    mean: float = 0.0
    coupling: float = 0.0
    noise: float = 1.0

    @classmethod
    def for_accuracy(cls, accuracy: float, category: str, frame_rate: float, window_length: int = 60,
                     mean: float = 0.0, noise: float = 1.0, direction: int = 1, drop_rate: float = 0.0):
        """Signal whose Bayes accuracy at ``window_length`` is ``accuracy``."""
        if not 0.5 <= accuracy < 1:
            raise InvalidSpec('target accuracy must lie in [0.5, 1)', stage='synth')
        n = _frames_per_window(category, frame_rate, window_length, drop_rate)
        coupling = noise * stats.norm.ppf(accuracy) / math.sqrt(n)
        return cls(mean=mean, coupling=math.copysign(coupling, direction), noise=noise)

    def as_dict(self):
        return {'mean': self.mean, 'coupling': self.coupling, 'noise': self.noise}


def _default_signals():
    # lower blink rates under high attention
    return {
        'EB': CategorySignal(0.3, -0.01, 0.15),
        'EAR': CategorySignal(0.3, 0.004, 0.05),
        'HS': CategorySignal(180.0, 0.8, 12.0),
        'NS': CategorySignal(40.0, 0.2, 4.0),
        'HP': CategorySignal(0.0, 0.3, 6.0),
        'Exp': CategorySignal(0.0, 0.015, 0.6),
        'H': CategorySignal(0.5, 0.02, 0.4),
    }


@dataclasses.dataclass(frozen=True)
class SynthSpec:
    """What to generate. ``signals`` maps each generated category to its model.

    Sessions last ``session_seconds``, or a length drawn uniformly up to
    ``session_seconds_max`` when that is set. ``drop_rate`` removes frames
    at random. With ``landmarks`` the EAR, HS and NS categories are written
    as landmark files instead of frame features.
    """

    n_users: int = 10
    sessions_per_user: int = 1
    session_seconds: int = 600
    session_seconds_max: typing.Optional[int] = None
    frame_rate: float = 5.0
    attention_step: float = 2.5
    attention_reversion: float = 0.01
    drop_rate: float = 0.0
    landmarks: bool = False
    signals: typing.Mapping[str, CategorySignal] = dataclasses.field(default_factory=_default_signals)

    def validate(self):
        """Raise InvalidSpec for unusable settings."""
        problems = []
        if self.n_users < 1:
            problems.append('n_users must be positive')
        if self.sessions_per_user < 1:
            problems.append('sessions_per_user must be positive')
        if self.session_seconds < 1:
            problems.append('session_seconds must be positive')
        if self.session_seconds_max is not None and self.session_seconds_max < self.session_seconds:
            problems.append('session_seconds_max is below session_seconds')
        if not self.frame_rate > 0:
            problems.append('frame_rate must be positive')
        if self.attention_step < 0:
            problems.append('attention_step must not be negative')
        if not 0 <= self.attention_reversion <= 1:
            problems.append('attention_reversion must lie in [0, 1]')
        if not 0 <= self.drop_rate < 1:
            problems.append('drop_rate must lie in [0, 1)')
        if not self.signals:
            problems.append('no categories to generate')
        for category, signal in self.signals.items():
            if category not in CATEGORIES:
                problems.append('unknown category {0!r}'.format(category))
            elif signal.noise < 0 or not all(math.isfinite(v) for v in (signal.mean, signal.coupling, signal.noise)):
                problems.append('{0}: noise must be finite and not negative'.format(category))
        if problems:
            raise InvalidSpec('; '.join(problems), stage='synth')
        return self

    @property
    def categories(self) -> typing.List[str]:
        return [c for c in CATEGORIES if c in self.signals]

    def user_ids(self) -> typing.List[str]:
        width = len(str(self.n_users))
        return ['user{0:0{1}d}'.format(k, width) for k in range(1, self.n_users + 1)]

    def as_dict(self):
        data = dataclasses.asdict(self)
        data['signals'] = {c: self.signals[c].as_dict() for c in self.categories}
        return data

    @classmethod
    def from_dict(cls, data):
        """Build from a mapping with upper- or lower-case keys.

        A signal given as ``{accuracy = 0.7}`` is solved for its coupling at
        the reference window length (``WINDOW``, default 60 s).
        """
        values = {str(k).lower(): v for k, v in data.items()}
        fields = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(values) - fields - {'window'})
        if unknown:
            raise InvalidSpec('unknown generator settings: {0}'.format(', '.join(unknown)), stage='synth')
        window = int(values.pop('window', 60))
        signals = values.pop('signals', None)
        try:
            spec = cls(**values)
        except TypeError as exc:
            raise InvalidSpec(str(exc), stage='synth')
        if signals is not None:
            parsed = {}
            for category, entry in signals.items():
                entry = {str(k).lower(): v for k, v in entry.items()}
                if 'accuracy' in entry:
                    parsed[category] = CategorySignal.for_accuracy(
                        float(entry['accuracy']), category, spec.frame_rate, window,
                        float(entry.get('mean', 0.0)), float(entry.get('noise', 1.0)),
                        int(entry.get('direction', 1)), spec.drop_rate)
                else:
                    parsed[category] = CategorySignal(float(entry.get('mean', 0.0)),
                                                      float(entry.get('coupling', 0.0)),
                                                      float(entry.get('noise', 1.0)))
            spec = dataclasses.replace(spec, signals=parsed)
        return spec


@dataclasses.dataclass(frozen=True)
class SynthResult:
    """Where a dataset went and its ground truth."""

    root: str
    users: typing.Tuple[str, ...]
    truth: dict


def _frames_per_window(category, frame_rate, window_length, drop_rate=0.0):
    if category not in CATEGORY_DIMENSIONS:
        raise InvalidSpec('unknown category {0!r}'.format(category), stage='synth')
    return frame_rate * (1.0 - drop_rate) * window_length * CATEGORY_DIMENSIONS[category]


def _separation(signal: CategorySignal, n: float) -> float:
    if signal.coupling == 0:
        return 0.0
    if signal.noise == 0:
        return math.inf
    return abs(signal.coupling) * math.sqrt(n) / signal.noise


def bayes_accuracy(signal: CategorySignal, category: str, frame_rate: float, window_length: int,
                   drop_rate: float = 0.0) -> float:
    """Best achievable accuracy on windows whose seconds share one side of the midpoint."""
    d = _separation(signal, _frames_per_window(category, frame_rate, window_length, drop_rate))
    return float(stats.norm.cdf(d))


def combined_bayes_accuracy(signals: typing.Mapping[str, CategorySignal], frame_rate: float,
                            window_length: int, drop_rate: float = 0.0) -> float:
    """Bayes accuracy of several independent categories observed together."""
    total = 0.0
    for category, signal in signals.items():
        d = _separation(signal, _frames_per_window(category, frame_rate, window_length, drop_rate))
        total += d * d
    return float(stats.norm.cdf(math.sqrt(total)))


def attention_walk(seconds: int, rng, step: float = 2.5, reversion: float = 0.01) -> np.ndarray:
    """Mean-reverting random walk around 50, clipped to [0, 100]."""
    values = np.empty(seconds)
    level = rng.uniform(20.0, 80.0)
    shocks = rng.normal(0.0, step, size=seconds)
    for t in range(seconds):
        values[t] = level
        level = min(100.0, max(0.0, level + reversion * (MIDPOINT - level) + shocks[t]))
    return np.round(values, 3)


def _eye(n, cx, cy, ear):
    """Six eye points with corners 2 px apart and lids at +-``ear``."""
    eye = np.zeros((n, 6, 2))
    eye[:, 0] = (cx - 1.0, cy)
    eye[:, 3] = (cx + 1.0, cy)
    eye[:, [1, 5], 0] = cx - 0.5
    eye[:, [2, 4], 0] = cx + 0.5
    eye[:, [1, 2], 1] = cy - ear[:, None]
    eye[:, [4, 5], 1] = cy + ear[:, None]
    return eye


def _extremes(n, cx, cy, size):
    """Left, top, right and bottom points of a box of ``size`` (width, height)."""
    return np.stack([
        np.column_stack([cx - size[:, 0] / 2, np.full(n, cy)]),
        np.column_stack([np.full(n, cx), cy - size[:, 1] / 2]),
        np.column_stack([cx + size[:, 0] / 2, np.full(n, cy)]),
        np.column_stack([np.full(n, cx), cy + size[:, 1] / 2]),
    ], axis=1)


def _landmark_frames(user_id, timestamps, values):
    """Landmarks whose derived head, nose and eye measures equal ``values``."""
    n = len(timestamps)
    ear = values.get('EAR', np.full((n, 2), 0.3))
    points = np.zeros((n, N_POINTS, 2))
    points[:, 0:6] = _eye(n, 280.0, 210.0, ear[:, 0])
    points[:, 6:10] = _extremes(n, 320.0, 240.0, values.get('HS', np.full((n, 2), 180.0)))
    points[:, 10:14] = _extremes(n, 320.0, 260.0, values.get('NS', np.full((n, 2), 40.0)))
    left = _eye(n, 360.0, 210.0, ear[:, 1])
    return [LandmarkFrame(user_id, float(timestamps[k]), points[k], True, left[k]) for k in range(n)]


@dataclasses.dataclass(frozen=True, eq=False)
class SessionTrace:
    """What the ground truth needs of a generated session: attention and frames per second."""

    user_id: str
    session_id: str
    attention: np.ndarray
    frame_counts: np.ndarray


def _simulate_user(spec: SynthSpec, user_id: str, seed: int):
    """Yield ``(trace, timestamps, values)`` per session, drawn from the user's seed."""
    rng = np.random.default_rng(utils.derive_seed(seed, user_id))
    for k in range(1, spec.sessions_per_user + 1):
        session_id = 'session{0}'.format(k)
        seconds = spec.session_seconds
        if spec.session_seconds_max is not None:
            seconds = int(rng.integers(spec.session_seconds, spec.session_seconds_max + 1))
        attention = attention_walk(seconds, rng, spec.attention_step, spec.attention_reversion)
        n_frames = int(math.floor(seconds * spec.frame_rate))
        timestamps = np.arange(n_frames) / spec.frame_rate
        keep = rng.random(n_frames) >= spec.drop_rate
        timestamps = timestamps[keep]
        second = np.floor(timestamps).astype(int)
        side = np.where(attention[second] >= MIDPOINT, 1.0, -1.0)

        values = {}
        for category in spec.categories:
            signal = spec.signals[category]
            noise = rng.standard_normal((len(timestamps), CATEGORY_DIMENSIONS[category]))
            values[category] = _frame_values(category, signal, side, noise)
        trace = SessionTrace(user_id, session_id, attention, np.bincount(second, minlength=seconds))
        yield trace, timestamps, values


def _frame_values(category, signal: CategorySignal, side, noise):
    values = signal.mean + signal.coupling * side[:, None] + signal.noise * noise
    if category == 'EB':
        values = np.clip(values, 0.0, 1.0)
    return values


def _generate_user(spec: SynthSpec, layout: DatasetLayout, user_id: str, seed: int) -> typing.List[SessionTrace]:
    traces = []
    for trace, timestamps, values in _simulate_user(spec, user_id, seed):
        session_id = trace.session_id
        tracks = []
        landmark_values = {}
        for category in spec.categories:
            if spec.landmarks and category in LANDMARK_CATEGORIES:
                landmark_values[category] = values[category]
                continue
            tracks.append(FeatureTrack(user_id, session_id, category, timestamps.copy(), values[category],
                                       np.ones(len(timestamps), dtype=bool)))
        if tracks:
            write_frame_features(FrameFeatureStream(tuple(tracks)), layout.features_path(user_id, session_id))
        if landmark_values:
            write_landmarks(_landmark_frames(user_id, timestamps, landmark_values),
                            layout.landmarks_path(user_id, session_id))
        write_attention(AttentionSeries(user_id, trace.attention, session_id),
                        layout.attention_path(user_id, session_id))
        traces.append(trace)
    return traces


def session_traces(spec: SynthSpec, seed: int) -> typing.List[SessionTrace]:
    """Replay the generator's draws for ``seed`` without writing any file."""
    return [trace for user_id in spec.user_ids() for trace, _, _ in _simulate_user(spec, user_id, seed)]


def _weight(signal: CategorySignal) -> float:
    # likelihood ratio weight of a frame sum under Gaussian noise
    return signal.coupling / max(signal.noise, 1e-9) ** 2


def _second_sums(category, signal: CategorySignal, trace: SessionTrace, rng, replicates: int) -> np.ndarray:
    """Sums of ``value - mean`` per second, over frames and channels, for fresh noise draws."""
    side = np.where(trace.attention >= MIDPOINT, 1.0, -1.0)
    counts = trace.frame_counts * CATEGORY_DIMENSIONS[category]
    if category != 'EB':
        noise = rng.standard_normal((replicates, len(side)))
        return signal.coupling * side * counts + signal.noise * np.sqrt(counts) * noise
    second = np.repeat(np.arange(len(side)), trace.frame_counts)
    sums = np.empty((replicates, len(side)))
    for r in range(replicates):
        frames = _frame_values(category, signal, side[second], rng.standard_normal((len(second), 1)))
        sums[r] = np.bincount(second, weights=frames[:, 0] - signal.mean, minlength=len(side))
    return sums


def _window_totals(per_second: np.ndarray, length: int) -> np.ndarray:
    csum = np.concatenate([np.zeros(per_second.shape[:-1] + (1,)), np.cumsum(per_second, axis=-1)], axis=-1)
    return csum[..., length:] - csum[..., :-length]


def _best_accuracy(scores, labels) -> typing.Optional[float]:
    labels = np.asarray(labels)
    if not (np.any(labels > 0) and np.any(labels < 0)):
        return None
    return max_accuracy_threshold(scores, labels)[1]


def monte_carlo_accuracy(spec: SynthSpec, traces: typing.Sequence[SessionTrace], window_length: int,
                         seed: int, labeling: typing.Optional[LabelingConfig] = None,
                         replicates: int = TRUTH_REPLICATES) -> dict:
    """Best single-threshold accuracy of the likelihood statistic, per category and combined.

    Windows are cut at 1 s stride from the generated attention, labeled by
    the pooled percentile thresholds, and windows missing more seconds than
    allowed are dropped, as the pipeline does. The frame values are drawn
    again ``replicates`` times, clipped like the generator clips them, and
    summed per window with the likelihood ratio weight of each category.
    Values are None when the windows hold a single class.
    """
    labeling = labeling or LabelingConfig(window_length=window_length)
    try:
        thresholds = compute_label_thresholds([t.attention for t in traces], labeling)
    except DegenerateDistribution:
        LOGGER.warning('constant attention: no ground truth accuracies')
        return {'categories': {c: None for c in spec.categories}, 'combined': None, 'thresholds': None,
                'windows': {'High': 0, 'Low': 0}}

    scores = {c: [] for c in spec.categories}
    labels = []
    for trace in traces:
        if len(trace.attention) < window_length:
            continue
        band = _window_totals(trace.attention, window_length) / window_length
        missing = _window_totals((trace.frame_counts == 0).astype(float), window_length) / window_length
        tau_low, tau_high = thresholds
        signs = np.where(band <= tau_low, -1, np.where(band >= tau_high, 1, 0))
        keep = (signs != 0) & (missing <= labeling.max_missing_fraction)
        if not keep.any():
            continue
        labels.append(np.tile(signs[keep], replicates))
        rng = np.random.default_rng(utils.derive_seed(seed, trace.user_id, trace.session_id, 'truth'))
        for category in spec.categories:
            signal = spec.signals[category]
            totals = _window_totals(_second_sums(category, signal, trace, rng, replicates), window_length)
            scores[category].append((_weight(signal) * totals[:, keep]).ravel())

    if not labels:
        return {'categories': {c: None for c in spec.categories}, 'combined': None,
                'thresholds': list(thresholds), 'windows': {'High': 0, 'Low': 0}}
    labels = np.concatenate(labels)
    counts = {'High': int(np.sum(labels > 0)) // replicates, 'Low': int(np.sum(labels < 0)) // replicates}
    pooled = {c: np.concatenate(s) for c, s in scores.items()}
    per_category = {}
    for category in spec.categories:
        # orient the statistic so that High scores higher
        direction = 1.0 if spec.signals[category].coupling >= 0 else -1.0
        per_category[category] = _best_accuracy(direction * pooled[category], labels)
    combined = _best_accuracy(sum(pooled.values()), labels)
    return {'categories': per_category, 'combined': combined, 'thresholds': list(thresholds), 'windows': counts}


def truth_for(spec: SynthSpec, seed: int, traces: typing.Optional[typing.Sequence[SessionTrace]] = None) -> dict:
    """Ground truth of a spec: accuracies per category and window length.

    ``bayes_accuracy`` is the Monte Carlo estimate on the generated
    attention; ``ideal_accuracy`` is the closed form for windows that lie on
    one side of the midpoint.
    """
    traces = session_traces(spec, seed) if traces is None else traces
    estimates = {w: monte_carlo_accuracy(spec, traces, w, seed) for w in TRUTH_WINDOWS}
    return {
        'seed': seed,
        'spec': spec.as_dict(),
        'users': spec.user_ids(),
        'bayes_accuracy': {c: {str(w): estimates[w]['categories'][c] for w in TRUTH_WINDOWS}
                           for c in spec.categories},
        'combined_bayes_accuracy': {str(w): estimates[w]['combined'] for w in TRUTH_WINDOWS},
        'label_thresholds': {str(w): estimates[w]['thresholds'] for w in TRUTH_WINDOWS},
        'labeled_windows': {str(w): estimates[w]['windows'] for w in TRUTH_WINDOWS},
        'replicates': TRUTH_REPLICATES,
        'ideal_accuracy': {
            c: {str(w): bayes_accuracy(spec.signals[c], c, spec.frame_rate, w, spec.drop_rate)
                for w in TRUTH_WINDOWS}
            for c in spec.categories},
        'combined_ideal_accuracy': {
            str(w): combined_bayes_accuracy({c: spec.signals[c] for c in spec.categories},
                                            spec.frame_rate, w, spec.drop_rate)
            for w in TRUTH_WINDOWS},
        'midpoint': MIDPOINT,
    }


def generate(spec: SynthSpec, seed: int, root, threads: int = 1) -> SynthResult:
    """Write a dataset for ``spec`` under ``root``.

    Users are independent: each draws from its own seed derived from
    ``seed``, so the files do not depend on ``threads``.
    """
    spec.validate()
    layout = DatasetLayout(root)
    users = spec.user_ids()
    if threads > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
            per_user = list(pool.map(lambda u: _generate_user(spec, layout, u, seed), users))
    else:
        per_user = [_generate_user(spec, layout, user_id, seed) for user_id in users]
    truth = truth_for(spec, seed, [trace for traces in per_user for trace in traces])
    utils.dump_json(truth, layout.truth_path)
    LOGGER.info('generated {0} users x {1} sessions under {2}'.format(
        len(users), spec.sessions_per_user, os.path.abspath(str(root))))
    return SynthResult(str(root), tuple(users), truth)

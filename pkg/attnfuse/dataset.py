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

"""Dataset folders, session loading, label thresholds, the window cache and feature banks.

A dataset folder looks like::

    features/<user>/<session>.csv     frame features
    attention/<user>/<session>.txt    attention, one value per second
    landmarks/<user>/<session>.csv    landmarks (optional)
    truth.json                        written by the generator

Sessions are discovered from the attention files.
"""

import concurrent.futures
import dataclasses
import os
import typing

import natsort
import numpy as np
from blinker import signal

from . import utils
from .derive import derive_landmark_stream, normalize_track
from .errors import (EmptyStream, InsufficientUsers, MalformedRow, MissingCategory,
                     NonFiniteFeature)
from .fuse import FeatureMode, global_feature_names
from .globalfeat import N_GLOBAL, global_features_batch
from .ingest import (CATEGORIES, CATEGORY_DIMENSIONS, AttentionSeries, FrameFeatureStream,
                     parse_attention_stream, parse_frame_features, parse_landmarks)
from .log import stage_logger
from .state import CacheManifest
from .window import (LabelingConfig, SecondFeatureSeries, WindowSample, candidate_count,
                     compute_label_thresholds, dump_windows, extract_windows, label_for,
                     load_windows, per_second_average, sort_windows)

__all__ = (
    'REFERENCE_WINDOW_COUNTS',
    'DatasetLayout',
    'SessionData',
    'ThresholdPlan',
    'WindowSet',
    'FeatureBank',
    'load_session',
    'load_sessions',
    'plan_thresholds',
    'build_windows',
    'load_or_build_windows',
)

LOGGER = stage_logger('dataset')

# Labeled window counts reported for the 60-user recordings at 30/60/120 s.
REFERENCE_WINDOW_COUNTS = {30: 10376, 60: 8309, 120: 5605}

session_loaded = signal('session_loaded')


class DatasetLayout:
    """Paths inside a dataset folder."""

    def __init__(self, root):
        self.root = str(root)

    def features_path(self, user_id, session_id):
        return os.path.join(self.root, 'features', user_id, session_id + '.csv')

    def attention_path(self, user_id, session_id):
        return os.path.join(self.root, 'attention', user_id, session_id + '.txt')

    def landmarks_path(self, user_id, session_id):
        return os.path.join(self.root, 'landmarks', user_id, session_id + '.csv')

    @property
    def truth_path(self):
        return os.path.join(self.root, 'truth.json')

    def sessions(self) -> typing.List[typing.Tuple[str, str]]:
        """Return (user, session) pairs, users and sessions naturally sorted."""
        base = os.path.join(self.root, 'attention')
        if not os.path.isdir(base):
            raise EmptyStream('no attention folder', stage='ingest', record=base)
        pairs = []
        for user_id in natsort.natsorted(os.listdir(base)):
            folder = os.path.join(base, user_id)
            if not os.path.isdir(folder):
                continue
            names = [n[:-4] for n in os.listdir(folder) if n.endswith('.txt')]
            pairs.extend((user_id, s) for s in natsort.natsorted(names))
        if not pairs:
            raise EmptyStream('no attention files', stage='ingest', record=base)
        return pairs


@dataclasses.dataclass(frozen=True, eq=False)
class SessionData:
    """Per-second features and attention of one session."""

    user_id: str
    session_id: str
    attention: AttentionSeries
    series: typing.Dict[str, SecondFeatureSeries]
    zero_variance: typing.Tuple[str, ...] = ()

    @property
    def seconds(self) -> int:
        return self.attention.seconds


def _session_tracks(stream: FrameFeatureStream, user_id, session_id, path):
    tracks = {t.category: t for t in stream.tracks if (t.user_id, t.session_id) == (user_id, session_id)}
    others = [pair for pair in stream.sessions() if pair != (user_id, session_id)]
    if others:
        raise MalformedRow('file holds rows of {0}/{1}, expected only {2}/{3}'.format(
            others[0][0], others[0][1], user_id, session_id), path)
    return tracks


def load_session(layout: DatasetLayout, user_id, session_id,
                 normalize_categories=('HS', 'NS')) -> SessionData:
    """Parse, derive, normalize and average one session.

    Landmark-derived categories only fill categories the frame-feature file
    lacks. Normalized categories are z-scored over the session's valid frames.
    """
    attention = parse_attention_stream(layout.attention_path(user_id, session_id), user_id, session_id)
    tracks = {}
    features_path = layout.features_path(user_id, session_id)
    if os.path.exists(features_path):
        tracks.update(_session_tracks(parse_frame_features(features_path), user_id, session_id, features_path))
    landmarks_path = layout.landmarks_path(user_id, session_id)
    if os.path.exists(landmarks_path):
        frames = parse_landmarks(landmarks_path)
        derived = derive_landmark_stream(frames, session_id)
        for track in derived.tracks:
            if track.user_id != user_id:
                raise MalformedRow('landmarks of user {0} in a file of {1}'.format(track.user_id, user_id),
                                   landmarks_path)
            tracks.setdefault(track.category, track)
    if not tracks:
        raise MissingCategory('no frame features or landmarks', stage='ingest',
                              record='{0}/{1}'.format(user_id, session_id))

    zero_variance = []
    series = {}
    for category in CATEGORIES:
        track = tracks.get(category)
        if track is None:
            continue
        if category in normalize_categories:
            track, stats = normalize_track(track)
            if stats.zero_variance:
                zero_variance.append(category)
        series[category] = per_second_average(track, attention.seconds)
    session_loaded.send('dataset', user_id=user_id, session_id=session_id, seconds=attention.seconds)
    return SessionData(user_id, session_id, attention, series, tuple(zero_variance))


def _map(function, items, threads):
    """Map in order, on a thread pool when ``threads`` > 1."""
    if threads > 1 and len(items) > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(function, items))
    return [function(item) for item in items]


def load_sessions(layout: DatasetLayout, normalize_categories=('HS', 'NS'), threads=1) -> typing.List[SessionData]:
    """Load every session of a dataset, in natural (user, session) order."""
    pairs = layout.sessions()
    return _map(lambda pair: load_session(layout, pair[0], pair[1], normalize_categories), pairs, threads)


@dataclasses.dataclass(frozen=True)
class ThresholdPlan:
    """Label thresholds: pooled, per held-out user, and the envelope used for the cache.

    ``fold`` maps a held-out user to thresholds computed without that user;
    it is None when every fold shares ``pooled``. ``sources`` and
    ``pooled_sources`` record whose attention values fed each of them.
    """

    scope: str
    pooled: typing.Tuple[float, float]
    fold: typing.Optional[typing.Dict[str, typing.Tuple[float, float]]] = None
    explicit: bool = False
    sources: typing.Optional[typing.Dict[str, typing.Tuple[str, ...]]] = None
    pooled_sources: typing.Optional[typing.Tuple[str, ...]] = None

    @property
    def envelope(self) -> typing.Tuple[float, float]:
        """Thresholds that keep every window some fold labels."""
        if not self.fold:
            return self.pooled
        return (max(t[0] for t in self.fold.values()), min(t[1] for t in self.fold.values()))

    def for_user(self, user_id) -> typing.Tuple[float, float]:
        if self.fold:
            return self.fold[user_id]
        return self.pooled

    def source_users(self, user_id) -> typing.Optional[typing.Tuple[str, ...]]:
        """Users whose attention set the labels of the fold holding out ``user_id``.

        Explicit thresholds have no source users; None means nothing was recorded.
        """
        if self.explicit:
            return ()
        if self.fold and user_id in self.fold:
            return self.sources.get(user_id) if self.sources else None
        return self.pooled_sources

    def as_dict(self):
        return {
            'scope': self.scope,
            'explicit': self.explicit,
            'pooled': list(self.pooled),
            'fold': {u: list(t) for u, t in self.fold.items()} if self.fold else None,
            'envelope': list(self.envelope),
            'sources': {u: list(s) for u, s in self.sources.items()} if self.sources else None,
            'pooled_sources': list(self.pooled_sources) if self.pooled_sources is not None else None,
        }

    @classmethod
    def from_dict(cls, data):
        fold = data.get('fold')
        return cls(scope=data['scope'], pooled=tuple(data['pooled']),
                   fold={u: tuple(t) for u, t in fold.items()} if fold else None,
                   explicit=bool(data.get('explicit', False)),
                   sources=_sources(data.get('sources')),
                   pooled_sources=tuple(data['pooled_sources']) if data.get('pooled_sources') is not None else None)


def _sources(data):
    return {u: tuple(s) for u, s in data.items()} if data else None


def plan_thresholds(sessions: typing.Sequence[SessionData], config) -> ThresholdPlan:
    """Work out the label thresholds for a configuration."""
    labeling = LabelingConfig.from_config(config)
    if config.tau_low is not None:
        return ThresholdPlan(config.threshold_scope, (config.tau_low, config.tau_high), None, True, None, ())
    by_user = {}
    for s in sessions:
        by_user.setdefault(s.user_id, []).append(s.attention.values)
    pooled = compute_label_thresholds([v for values in by_user.values() for v in values], labeling)
    everyone = tuple(utils.sort_users(by_user))
    if config.threshold_scope == 'pooled':
        return ThresholdPlan('pooled', pooled, pooled_sources=everyone)
    if len(by_user) < 2:
        raise InsufficientUsers('fold thresholds need at least two users', stage='window')
    fold = {}
    sources = {}
    for user_id in everyone:
        others = [v for u, values in by_user.items() if u != user_id for v in values]
        fold[user_id] = compute_label_thresholds(others, labeling)
        sources[user_id] = tuple(u for u in everyone if u != user_id)
    return ThresholdPlan('fold', pooled, fold, sources=sources, pooled_sources=everyone)


@dataclasses.dataclass(eq=False)
class WindowSet:
    """Labeled windows of a dataset and the header describing how they were cut."""

    windows: typing.List[WindowSample]
    header: dict

    @property
    def thresholds(self) -> ThresholdPlan:
        return ThresholdPlan.from_dict(self.header['thresholds'])

    def users(self) -> typing.List[str]:
        return utils.sort_users(self.header['candidates'])

    def counts(self) -> dict:
        """Window counts per label and per user, under the stored labels."""
        per_user = {u: 0 for u in self.users()}
        per_label = {'High': 0, 'Low': 0}
        for w in self.windows:
            per_user[w.user_id] = per_user.get(w.user_id, 0) + 1
            per_label[w.label.value] += 1
        return {'total': len(self.windows), 'per_label': per_label, 'per_user': per_user}


def build_windows(config, layout: typing.Optional[DatasetLayout] = None) -> WindowSet:
    """Load all sessions of ``config.data_folder`` and cut their windows."""
    layout = layout or DatasetLayout(config.data_folder)
    labeling = LabelingConfig.from_config(config)
    sessions = load_sessions(layout, config.normalize_categories, config.threads)
    plan = plan_thresholds(sessions, config)
    envelope = plan.envelope

    def cut(session):
        return extract_windows(session.series, session.attention, labeling, envelope)

    windows = sort_windows(w for batch in _map(cut, sessions, config.threads) for w in batch)
    candidates = {}
    seconds = {}
    available = set(CATEGORIES)
    for s in sessions:
        candidates[s.user_id] = candidates.get(s.user_id, 0) + candidate_count(s.seconds, labeling.window_length)
        seconds.setdefault(s.user_id, {})[s.session_id] = s.seconds
        available &= set(s.series)
        for category in s.zero_variance:
            LOGGER.warning('{0}/{1}: {2} has zero variance'.format(s.user_id, s.session_id, category))
    header = {
        'key': config.window_cache_key,
        'window_length': labeling.window_length,
        'thresholds': plan.as_dict(),
        'candidates': candidates,
        'session_seconds': seconds,
        'categories': [c for c in CATEGORIES if c in available],
    }
    LOGGER.info('{0} labeled windows out of {1} candidates ({2} users)'.format(
        len(windows), sum(candidates.values()), len(candidates)))
    return WindowSet(windows, header)


def window_cache_path(config) -> str:
    return os.path.join(config.cache_folder, 'windows-{0}.jsonl'.format(config.window_cache_key[:16]))


def load_or_build_windows(config, refresh: bool = False) -> typing.Tuple[WindowSet, bool]:
    """Return the windows for a config, from the cache when it holds them.

    The second value tells whether the cache was used.
    """
    manifest = CacheManifest(config.cache_folder)
    key = config.window_cache_key
    path = None if refresh else manifest.lookup('windows', key)
    if path is not None:
        header, windows = load_windows(path)
        if header.get('key') == key:
            LOGGER.info('using cached windows from {0}'.format(path))
            return WindowSet(windows, header), True
    window_set = build_windows(config)
    path = window_cache_path(config)
    dump_windows(window_set.windows, path, window_set.header)
    manifest.record('windows', key, path, n_windows=len(window_set.windows))
    return window_set, False


@dataclasses.dataclass(eq=False)
class FeatureBank:
    """Feature matrices of every window, one per category, rows aligned with ``window_ids``.

    Local features flatten the N x W window row by row; global features put
    the 28 values of each channel one after another.
    """

    window_ids: typing.List[str]
    users: np.ndarray
    band: np.ndarray
    labels: np.ndarray
    features: typing.Dict[str, np.ndarray]
    mode: FeatureMode

    def __len__(self):
        return len(self.window_ids)

    @property
    def categories(self) -> typing.List[str]:
        return [c for c in CATEGORIES if c in self.features]

    @classmethod
    def build(cls, windows: typing.Sequence[WindowSample], categories=CATEGORIES,
              mode: FeatureMode = FeatureMode.LOCAL):
        """Compute features for ``categories`` of every window."""
        if not windows:
            raise EmptyStream('no labeled windows', stage='eval')
        features = {}
        for category in [c for c in CATEGORIES if c in categories]:
            missing = [w for w in windows if category not in w.local]
            if missing:
                raise MissingCategory('window lacks category {0}'.format(category), stage='eval',
                                      record=missing[0].window_id)
            stack = np.stack([np.asarray(w.local[category], dtype=float) for w in windows])
            n, channels, length = stack.shape
            if channels != CATEGORY_DIMENSIONS[category]:
                raise MalformedRow('{0} window has {1} channels'.format(category, channels), stage='eval')
            if mode is FeatureMode.GLOBAL:
                matrix = global_features_batch(stack.reshape(n * channels, length)).reshape(n, channels * N_GLOBAL)
            else:
                matrix = stack.reshape(n, channels * length)
            if not np.all(np.isfinite(matrix)):
                raise NonFiniteFeature('{0} features hold non-finite values'.format(category), stage='eval')
            features[category] = matrix
        return cls(
            window_ids=[w.window_id for w in windows],
            users=np.array([w.user_id for w in windows], dtype=object),
            band=np.array([w.band_attention for w in windows], dtype=float),
            labels=np.array([w.label.sign for w in windows], dtype=float),
            features=features,
            mode=mode,
        )

    def matrix(self, categories) -> np.ndarray:
        """Features of several categories side by side, in canonical order."""
        return np.hstack([self.features[c] for c in CATEGORIES if c in categories])

    def labels_under(self, thresholds) -> np.ndarray:
        """Label signs under other thresholds; 0 marks windows left unlabeled."""
        result = np.zeros(len(self.band))
        for k, band in enumerate(self.band):
            label = label_for(band, thresholds)
            if label is not None:
                result[k] = label.sign
        return result

    def feature_names(self, categories) -> typing.List[str]:
        if self.mode is FeatureMode.GLOBAL:
            return global_feature_names([c for c in CATEGORIES if c in categories])
        names = []
        for category in [c for c in CATEGORIES if c in categories]:
            length = self.features[category].shape[1] // CATEGORY_DIMENSIONS[category]
            for channel in range(CATEGORY_DIMENSIONS[category]):
                names.extend('{0}[{1}].t{2}'.format(category, channel, t) for t in range(length))
        return names

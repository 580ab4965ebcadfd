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

"""Parsers and writers for frame features, attention and landmark files.

Three text formats enter the pipeline:

* frame-feature CSV, ``user_id,session_id,timestamp,category,v1[,v2,...]``,
  one row per frame and facial feature category;
* attention files, one value in [0, 100] per line, line ``i`` being second ``i``;
* landmark CSV, ``user_id,timestamp,valid,p0x,p0y,...,p13x,p13y``, optionally
  followed by a second eye block ``l0x,l0y,...,l5x,l5y``.

Parsers are pure functions of the file contents. Writers emit the same
formats, with floats written so that they parse back exactly.
"""

import csv
import dataclasses
import io
import math
import os
import typing

import numpy as np

from .errors import (DimensionMismatch, EmptyStream, MalformedRow,
                     NonMonotonicTimestamp, OutOfRange)
from .utils import format_number, makedirs

__all__ = (
    'CATEGORIES',
    'CATEGORY_DIMENSIONS',
    'FrameFeatureRecord',
    'FeatureTrack',
    'FrameFeatureStream',
    'LandmarkFrame',
    'AttentionSeries',
    'parse_frame_features',
    'parse_attention_stream',
    'parse_landmarks',
    'write_frame_features',
    'write_attention',
    'write_landmarks',
)

# Canonical order; fused score vectors and concatenated features follow it.
CATEGORIES = ('EB', 'EAR', 'HS', 'NS', 'HP', 'Exp', 'H')

CATEGORY_DIMENSIONS = {
    'EB': 1,
    'EAR': 2,
    'HS': 2,
    'NS': 2,
    'HP': 2,
    'Exp': 16,
    'H': 1,
}

N_POINTS = 14
N_EYE_POINTS = 6
LANDMARK_COLUMNS = 3 + 2 * N_POINTS
LANDMARK_COLUMNS_WITH_LEFT_EYE = LANDMARK_COLUMNS + 2 * N_EYE_POINTS

_CATEGORY_LOOKUP = {c.lower(): c for c in CATEGORIES}
_TRUE = {'1', 'true', 'yes'}
_FALSE = {'0', 'false', 'no'}


@dataclasses.dataclass(frozen=True)
class FrameFeatureRecord:
    """One frame's values for one facial feature category."""

    user_id: str
    session_id: str
    timestamp: float
    category: str
    values: typing.Tuple[float, ...]


@dataclasses.dataclass(frozen=True, eq=False)
class FeatureTrack:
    """All frames of one (user, session, category), in timestamp order.

    ``values`` has one row per frame and one column per channel of the
    category. Frames with ``valid`` False are skipped by averaging.
    """

    user_id: str
    session_id: str
    category: str
    timestamps: np.ndarray
    values: np.ndarray
    valid: np.ndarray

    def __post_init__(self):
        for array in (self.timestamps, self.values, self.valid):
            array.setflags(write=False)

    @property
    def key(self):
        return (self.user_id, self.session_id, self.category)

    @property
    def dimension(self) -> int:
        return self.values.shape[1]

    def __len__(self):
        return len(self.timestamps)


@dataclasses.dataclass(frozen=True, eq=False)
class FrameFeatureStream:
    """Frame feature tracks grouped by (user, session, category).

    ``row_order`` holds one ``(track index, frame index)`` pair per row of
    the parsed file, in file order; streams built in memory have none.
    """

    tracks: typing.Tuple[FeatureTrack, ...]
    source: typing.Optional[str] = None
    row_order: typing.Optional[np.ndarray] = None

    def get(self, user_id, session_id, category) -> typing.Optional[FeatureTrack]:
        """Return the track for a key, or None."""
        for track in self.tracks:
            if track.key == (user_id, session_id, category):
                return track
        return None

    def sessions(self) -> typing.List[typing.Tuple[str, str]]:
        """Return the (user, session) pairs in order of first appearance."""
        seen = []
        for track in self.tracks:
            pair = (track.user_id, track.session_id)
            if pair not in seen:
                seen.append(pair)
        return seen

    def categories(self, user_id, session_id) -> typing.List[str]:
        """Return the categories present for a session, in canonical order."""
        present = {t.category for t in self.tracks if (t.user_id, t.session_id) == (user_id, session_id)}
        return [c for c in CATEGORIES if c in present]

    def records(self) -> typing.Iterator[FrameFeatureRecord]:
        """Yield the records in file order.

        Without a recorded file order, records come session by session in
        order of first appearance, and by timestamp then canonical category
        order within a session.
        """
        if self.row_order is not None:
            for t, k in self.row_order:
                track = self.tracks[t]
                yield FrameFeatureRecord(track.user_id, track.session_id, float(track.timestamps[k]),
                                         track.category, tuple(float(v) for v in track.values[k]))
            return
        for user_id, session_id in self.sessions():
            rows = []
            for track in self.tracks:
                if (track.user_id, track.session_id) != (user_id, session_id):
                    continue
                rank = CATEGORIES.index(track.category)
                for ts, values in zip(track.timestamps, track.values):
                    rows.append((float(ts), rank, track.category, tuple(float(v) for v in values)))
            rows.sort(key=lambda r: (r[0], r[1]))
            for ts, _, category, values in rows:
                yield FrameFeatureRecord(user_id, session_id, ts, category, values)

    def __len__(self):
        return sum(len(t) for t in self.tracks)


@dataclasses.dataclass(frozen=True, eq=False)
class LandmarkFrame:
    """Fourteen 2-D landmark points of one frame.

    P0..P5 outline one eye, P6..P9 are the head extremes and P10..P13 the
    nose extremes. ``left_eye`` holds the six points of the other eye when
    the producer supplies them.
    """

    user_id: str
    timestamp: float
    points: np.ndarray
    valid: bool = True
    left_eye: typing.Optional[np.ndarray] = None

    def point(self, index: int) -> np.ndarray:
        return self.points[index]

    @property
    def right_eye(self) -> np.ndarray:
        return self.points[:N_EYE_POINTS]


@dataclasses.dataclass(frozen=True, eq=False)
class AttentionSeries:
    """Attention level per second of a session; index ``i`` is second ``i``."""

    user_id: str
    values: np.ndarray
    session_id: typing.Optional[str] = None

    def __post_init__(self):
        self.values.setflags(write=False)

    @property
    def seconds(self) -> int:
        return len(self.values)

    def __len__(self):
        return len(self.values)


def _parse_float(text, path, line, what):
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise MalformedRow('{0} {1!r} is not a number'.format(what, text), path, line)
    if not math.isfinite(value):
        raise MalformedRow('{0} {1!r} is not finite'.format(what, text), path, line)
    return value


def _rows(path):
    """Yield (line number, cells) for the non-blank rows of a CSV file."""
    with io.open(path, 'r', encoding='utf-8-sig', newline='') as inf:
        for number, cells in enumerate(csv.reader(inf), start=1):
            if not cells or all(not c.strip() for c in cells):
                continue
            yield number, [c.strip() for c in cells]


def parse_frame_features(path) -> FrameFeatureStream:
    """Parse a frame-feature CSV file into tracks.

    A header row, recognised by its first cell ``user_id`` on the first
    non-blank row, may be omitted. Raises ``MalformedRow`` (with the line number),
    ``DimensionMismatch``, ``NonMonotonicTimestamp``, ``OutOfRange`` for EB
    values outside [0, 1] and ``EmptyStream`` for a file without rows.
    """
    path = str(path)
    groups = {}
    order = []
    row_order = []
    for index, (line, cells) in enumerate(_rows(path)):
        if index == 0 and cells[0].lower() == 'user_id':
            continue
        if len(cells) < 5:
            raise MalformedRow('expected at least 5 fields, got {0}'.format(len(cells)), path, line)
        user_id, session_id, ts_text, category_text = cells[:4]
        if not user_id or not session_id:
            raise MalformedRow('empty user or session id', path, line)
        category = _CATEGORY_LOOKUP.get(category_text.lower())
        if category is None:
            raise MalformedRow('unknown category {0!r}'.format(category_text), path, line)
        timestamp = _parse_float(ts_text, path, line, 'timestamp')
        if timestamp < 0:
            raise MalformedRow('negative timestamp {0!r}'.format(ts_text), path, line)
        values = [_parse_float(v, path, line, 'value') for v in cells[4:]]
        expected = CATEGORY_DIMENSIONS[category]
        if len(values) != expected:
            raise DimensionMismatch('{0} takes {1} value(s), got {2}'.format(category, expected, len(values)),
                                    path, line)
        if category == 'EB' and not 0.0 <= values[0] <= 1.0:
            raise OutOfRange('EB value {0!r} outside [0, 1]'.format(values[0]), path, line)

        key = (user_id, session_id, category)
        group = groups.get(key)
        if group is None:
            group = groups[key] = ([], [], len(order))
            order.append(key)
        timestamps, rows, track_index = group
        if timestamps and timestamp <= timestamps[-1]:
            raise NonMonotonicTimestamp('timestamp {0!r} does not increase after {1!r} in {2}/{3}/{4}'.format(
                timestamp, timestamps[-1], user_id, session_id, category), path, line)
        row_order.append((track_index, len(rows)))
        timestamps.append(timestamp)
        rows.append(values)

    if not order:
        raise EmptyStream('no frame feature rows', stage='ingest', record=path)

    tracks = []
    for key in order:
        timestamps, rows, _ = groups[key]
        tracks.append(FeatureTrack(
            user_id=key[0], session_id=key[1], category=key[2],
            timestamps=np.array(timestamps, dtype=float),
            values=np.array(rows, dtype=float).reshape(len(rows), CATEGORY_DIMENSIONS[key[2]]),
            valid=np.ones(len(rows), dtype=bool)))
    return FrameFeatureStream(tuple(tracks), source=path, row_order=np.array(row_order, dtype=int).reshape(-1, 2))


def _default_ids(path):
    """Guess (user, session) from a ``<user>/<session>.<ext>`` path."""
    session_id = os.path.splitext(os.path.basename(path))[0]
    user_id = os.path.basename(os.path.dirname(os.path.abspath(path)))
    return user_id, session_id


def parse_attention_stream(path, user_id=None, session_id=None) -> AttentionSeries:
    """Parse an attention file: one value per line, optional header line.

    Blank lines are ignored; a header is a non-numeric first non-blank line. Values must lie in [0, 100] (``OutOfRange``);
    a file without values raises ``EmptyStream``.
    """
    path = str(path)
    default_user, default_session = _default_ids(path)
    values = []
    first = True
    with io.open(path, 'r', encoding='utf-8-sig') as inf:
        for line, text in enumerate(inf, start=1):
            text = text.strip()
            if not text:
                continue
            header, first = first, False
            try:
                value = float(text)
            except ValueError:
                if header:
                    continue
                raise MalformedRow('attention value {0!r} is not a number'.format(text), path, line)
            if not math.isfinite(value) or not 0.0 <= value <= 100.0:
                raise OutOfRange('attention value {0!r} outside [0, 100]'.format(text), path, line)
            values.append(value)
    if not values:
        raise EmptyStream('no attention values', stage='ingest', record=path)
    return AttentionSeries(user_id=user_id or default_user,
                           values=np.array(values, dtype=float),
                           session_id=session_id or default_session)


def _parse_valid(text, path, line):
    lowered = text.lower()
    if lowered in _TRUE:
        return True
    if lowered in _FALSE:
        return False
    raise MalformedRow('valid flag {0!r} is not 0/1'.format(text), path, line)


def parse_landmarks(path) -> typing.List[LandmarkFrame]:
    """Parse a landmark CSV into frames, in file order.

    Every row needs user, timestamp, a validity flag and 28 coordinates,
    optionally 12 more for the second eye; all rows of a file use the same
    width. Timestamps must strictly increase per user. Invalid frames are
    kept with ``valid`` False. A valid frame whose eye has zero horizontal
    extent is malformed.
    """
    path = str(path)
    frames = []
    width = None
    last_timestamp = {}
    for index, (line, cells) in enumerate(_rows(path)):
        if index == 0 and cells[0].lower() == 'user_id':
            width = len(cells)
            if width not in (LANDMARK_COLUMNS, LANDMARK_COLUMNS_WITH_LEFT_EYE):
                raise MalformedRow('landmark header has {0} columns'.format(width), path, line)
            continue
        if width is None:
            width = len(cells)
        if len(cells) != width or width not in (LANDMARK_COLUMNS, LANDMARK_COLUMNS_WITH_LEFT_EYE):
            raise MalformedRow('expected {0} fields, got {1}'.format(
                width if width in (LANDMARK_COLUMNS, LANDMARK_COLUMNS_WITH_LEFT_EYE) else LANDMARK_COLUMNS,
                len(cells)), path, line)
        user_id = cells[0]
        if not user_id:
            raise MalformedRow('empty user id', path, line)
        timestamp = _parse_float(cells[1], path, line, 'timestamp')
        valid = _parse_valid(cells[2], path, line)
        coords = np.array([_parse_float(c, path, line, 'coordinate') for c in cells[3:]], dtype=float)
        points = coords[:2 * N_POINTS].reshape(N_POINTS, 2)
        left_eye = coords[2 * N_POINTS:].reshape(N_EYE_POINTS, 2) if len(coords) > 2 * N_POINTS else None

        previous = last_timestamp.get(user_id)
        if previous is not None and timestamp <= previous:
            raise NonMonotonicTimestamp('timestamp {0!r} does not increase after {1!r}'.format(
                timestamp, previous), path, line)
        last_timestamp[user_id] = timestamp

        if valid:
            for eye in (points[:N_EYE_POINTS], left_eye):
                if eye is not None and np.array_equal(eye[0], eye[3]):
                    raise MalformedRow('valid frame with zero eye width', path, line)
        points.setflags(write=False)
        if left_eye is not None:
            left_eye.setflags(write=False)
        frames.append(LandmarkFrame(user_id, timestamp, points, valid, left_eye))
    if not frames:
        raise EmptyStream('no landmark rows', stage='ingest', record=path)
    return frames


def write_frame_features(stream: FrameFeatureStream, path) -> None:
    """Write a stream in frame-feature CSV form, header included.

    Rows follow ``stream.records()``: the file order for parsed streams.
    """
    makedirs(os.path.dirname(str(path)))
    width = max((t.dimension for t in stream.tracks), default=1)
    with io.open(path, 'w', encoding='utf-8', newline='') as outf:
        writer = csv.writer(outf, lineterminator='\n')
        writer.writerow(['user_id', 'session_id', 'timestamp', 'category'] +
                        ['v{0}'.format(i + 1) for i in range(width)])
        for record in stream.records():
            writer.writerow([record.user_id, record.session_id, format_number(record.timestamp),
                             record.category] + [format_number(v) for v in record.values])


def write_attention(series: AttentionSeries, path) -> None:
    """Write an attention series, one value per line."""
    makedirs(os.path.dirname(str(path)))
    with io.open(path, 'w', encoding='utf-8') as outf:
        for value in series.values:
            outf.write(format_number(value) + '\n')


def write_landmarks(frames: typing.Sequence[LandmarkFrame], path) -> None:
    """Write landmark frames as CSV, header included."""
    makedirs(os.path.dirname(str(path)))
    with_left = any(f.left_eye is not None for f in frames)
    header = ['user_id', 'timestamp', 'valid']
    for k in range(N_POINTS):
        header += ['p{0}x'.format(k), 'p{0}y'.format(k)]
    if with_left:
        for k in range(N_EYE_POINTS):
            header += ['l{0}x'.format(k), 'l{0}y'.format(k)]
    with io.open(path, 'w', encoding='utf-8', newline='') as outf:
        writer = csv.writer(outf, lineterminator='\n')
        writer.writerow(header)
        for frame in frames:
            coords = list(np.asarray(frame.points).ravel())
            if with_left:
                coords += list(np.asarray(frame.left_eye).ravel())
            writer.writerow([frame.user_id, format_number(frame.timestamp), '1' if frame.valid else '0'] +
                            [format_number(c) for c in coords])

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

"""Landmark-derived features (eye aspect ratio, head and nose size) and z-scores."""

import dataclasses
import typing

import numpy as np

from .errors import DegenerateEye, EmptyStream, InvalidFrame
from .ingest import FeatureTrack, FrameFeatureStream, LandmarkFrame
from .log import stage_logger

__all__ = (
    'DerivedFrameFeatures',
    'Normalized',
    'compute_ear',
    'compute_sizes',
    'derive_frame',
    'zscore_normalize',
    'normalize_track',
    'derive_landmark_stream',
)

LOGGER = stage_logger('derive')


@dataclasses.dataclass(frozen=True)
class DerivedFrameFeatures:
    """Per-frame values computed from landmarks; sizes are in pixels."""

    ear_right: float
    ear_left: typing.Optional[float]
    head_width: float
    head_height: float
    nose_width: float
    nose_height: float


@dataclasses.dataclass(frozen=True, eq=False)
class Normalized:
    """A z-scored array with the statistics used to produce it."""

    values: np.ndarray
    mean: typing.Union[float, np.ndarray]
    std: typing.Union[float, np.ndarray]
    zero_variance: bool


def _ear(eyes: np.ndarray) -> typing.Tuple[np.ndarray, np.ndarray]:
    """Vertical and horizontal eye extents for eyes of shape (..., 6, 2)."""
    vertical = (np.linalg.norm(eyes[..., 1, :] - eyes[..., 5, :], axis=-1) +
                np.linalg.norm(eyes[..., 2, :] - eyes[..., 4, :], axis=-1))
    horizontal = np.linalg.norm(eyes[..., 0, :] - eyes[..., 3, :], axis=-1)
    return vertical, horizontal


def compute_ear(eye) -> float:
    """Return (|P1-P5| + |P2-P4|) / (2 |P0-P3|) for six eye points P0..P5."""
    eye = np.asarray(eye, dtype=float)
    if eye.shape != (6, 2):
        raise ValueError('an eye has six 2-D points, got shape {0}'.format(eye.shape))
    vertical, horizontal = _ear(eye)
    if horizontal == 0:
        raise DegenerateEye('eye corners P0 and P3 coincide', stage='derive')
    return float(vertical / (2.0 * horizontal))


def _sizes(points: np.ndarray) -> np.ndarray:
    """Head width/height and nose width/height for points of shape (..., 14, 2)."""
    return np.stack([
        points[..., 8, 0] - points[..., 6, 0],
        points[..., 9, 1] - points[..., 7, 1],
        points[..., 12, 0] - points[..., 10, 0],
        points[..., 13, 1] - points[..., 11, 1],
    ], axis=-1)


def compute_sizes(frame: LandmarkFrame) -> typing.Tuple[float, float, float, float]:
    """Return (head width, head height, nose width, nose height) of a valid frame.

    The values are signed differences of landmark coordinates.
    """
    if not frame.valid:
        raise InvalidFrame('frame at {0!r} is flagged invalid'.format(frame.timestamp),
                           stage='derive', record=frame.user_id)
    return tuple(float(v) for v in _sizes(np.asarray(frame.points, dtype=float)))


def derive_frame(frame: LandmarkFrame) -> DerivedFrameFeatures:
    """Compute every landmark-derived value of a valid frame."""
    head_width, head_height, nose_width, nose_height = compute_sizes(frame)
    ear_left = compute_ear(frame.left_eye) if frame.left_eye is not None else None
    return DerivedFrameFeatures(
        ear_right=compute_ear(frame.right_eye),
        ear_left=ear_left,
        head_width=head_width,
        head_height=head_height,
        nose_width=nose_width,
        nose_height=nose_height,
    )


def zscore_normalize(series, mean=None, std=None) -> Normalized:
    """Z-score a series, column-wise for 2-D input.

    Without ``mean`` and ``std`` the statistics (population std) come from
    the series itself. Columns with zero std map to zeros and set the
    ``zero_variance`` flag instead of failing.
    """
    x = np.asarray(series, dtype=float)
    if x.size == 0:
        raise EmptyStream('cannot normalize an empty series', stage='derive')
    if mean is None:
        mean = x.mean(axis=0)
    if std is None:
        std = x.std(axis=0)
    mean = np.asarray(mean, dtype=float)
    std = np.asarray(std, dtype=float)
    flat = std == 0
    safe = np.where(flat, 1.0, std)
    values = np.where(flat, 0.0, (x - mean) / safe)
    zero_variance = bool(np.any(flat))
    if zero_variance:
        LOGGER.warning('zero variance in z-score normalization; values set to 0')
    if mean.ndim == 0:
        mean, std = float(mean), float(std)
    return Normalized(values=values, mean=mean, std=std, zero_variance=zero_variance)


def normalize_track(track: FeatureTrack) -> typing.Tuple[FeatureTrack, Normalized]:
    """Z-score a track per channel using the statistics of its valid frames."""
    valid = track.values[track.valid]
    if len(valid) == 0:
        return track, Normalized(track.values.copy(), 0.0, 1.0, False)
    stats = zscore_normalize(valid)
    result = zscore_normalize(track.values, stats.mean, stats.std)
    values = np.where(track.valid[:, None], result.values, 0.0)
    normalized = FeatureTrack(track.user_id, track.session_id, track.category,
                              track.timestamps, values, track.valid)
    return normalized, Normalized(values, stats.mean, stats.std, stats.zero_variance)


def derive_landmark_stream(frames: typing.Sequence[LandmarkFrame], session_id: str) -> FrameFeatureStream:
    """Turn landmark frames into HS and NS tracks, plus EAR when both eyes are present.

    Invalid frames are carried with ``valid`` False and zero values.
    """
    tracks = []
    users = []
    for frame in frames:
        if frame.user_id not in users:
            users.append(frame.user_id)
    for user_id in users:
        own = [f for f in frames if f.user_id == user_id]
        timestamps = np.array([f.timestamp for f in own], dtype=float)
        valid = np.array([f.valid for f in own], dtype=bool)
        points = np.stack([np.asarray(f.points, dtype=float) for f in own])
        sizes = np.where(valid[:, None], _sizes(points), 0.0)
        tracks.append(FeatureTrack(user_id, session_id, 'HS', timestamps.copy(),
                                   np.ascontiguousarray(sizes[:, :2]), valid.copy()))
        tracks.append(FeatureTrack(user_id, session_id, 'NS', timestamps.copy(),
                                   np.ascontiguousarray(sizes[:, 2:]), valid.copy()))
        if all(f.left_eye is not None for f in own):
            eyes = np.stack([np.stack([f.right_eye, f.left_eye]) for f in own])
            vertical, horizontal = _ear(eyes)
            ok = valid[:, None] & (horizontal > 0)
            ear = np.where(ok, vertical / (2.0 * np.where(horizontal > 0, horizontal, 1.0)), 0.0)
            tracks.append(FeatureTrack(user_id, session_id, 'EAR', timestamps.copy(), ear,
                                       valid & ok.all(axis=1)))
        LOGGER.debug('derived landmark features for {0}/{1} ({2} frames)'.format(user_id, session_id, len(own)))
    return FrameFeatureStream(tuple(tracks))

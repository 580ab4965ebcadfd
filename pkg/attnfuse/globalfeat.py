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

"""Twenty-eight statistical descriptors of a window channel.

Derivatives are forward differences with a 1 s step: velocity ``v``,
acceleration ``a``, tangential acceleration ``a_t`` (difference of |v|),
the residual ``a_c = sqrt(max(a^2 - a_t^2, 0))`` and jerk ``j``. Ratios
with a zero denominator are 0. Location features are indices divided by
the length of the sequence they index (x uses W - 1).

Index  Feature
-----  ---------------------------------------------------------------
 1     sum of positive velocities
 2     sum of negative velocities
 3-5   location of the 1st, 2nd and 3rd largest local maximum of x
 6     mean velocity / max |v|
 7     mean velocity / max v
 8     rms v / max |v|
 9     rms a_c / max |a|
10     rms a_t / max |a|
11     rms a / max |a|
12     mean |a_c| / max |a|
13     std of v
14     std of a
15     mean |j|
16     mean j
17     max |j|
18     max j
19     rms j
20     location of max |j|
21     location of max j
22     sign changes of v (zeros skipped)
23     total positive velocity / total |negative velocity|
24     positive velocity count / negative velocity count
25     range of x
26     mean velocity / range of x
27     number of local maxima of x
28     mean |a|
"""

import dataclasses

import numpy as np

from .errors import TooShort

__all__ = (
    'N_GLOBAL',
    'FEATURE_NAMES',
    'KinematicDerivatives',
    'kinematics',
    'global_features',
    'global_features_batch',
    'global_vector',
)

N_GLOBAL = 28
MIN_LENGTH = 4

FEATURE_NAMES = (
    'sum_pos_v', 'sum_neg_v', 'max1_loc', 'max2_loc', 'max3_loc',
    'mean_v_over_max_abs_v', 'mean_v_over_max_v', 'rms_v_over_max_abs_v',
    'rms_ac_over_max_abs_a', 'rms_at_over_max_abs_a', 'rms_a_over_max_abs_a',
    'mean_abs_ac_over_max_abs_a', 'std_v', 'std_a', 'mean_abs_j', 'mean_j',
    'max_abs_j', 'max_j', 'rms_j', 'argmax_abs_j', 'argmax_j', 'v_sign_changes',
    'pos_neg_v_magnitude', 'pos_neg_v_count', 'range_x', 'mean_v_over_range',
    'n_local_maxima', 'mean_abs_a',
)


@dataclasses.dataclass(frozen=True, eq=False)
class KinematicDerivatives:
    x: np.ndarray
    v: np.ndarray
    a: np.ndarray
    a_t: np.ndarray
    a_c: np.ndarray
    j: np.ndarray


def _check_length(length):
    if length < MIN_LENGTH:
        raise TooShort('need at least {0} samples for jerk, got {1}'.format(MIN_LENGTH, length),
                       stage='globalfeat')


def _derivatives(x):
    v = np.diff(x, axis=-1)
    a = np.diff(v, axis=-1)
    a_t = np.diff(np.abs(v), axis=-1)
    a_c = np.sqrt(np.maximum(a * a - a_t * a_t, 0.0))
    j = np.diff(a, axis=-1)
    return v, a, a_t, a_c, j


def kinematics(x) -> KinematicDerivatives:
    """Return the derivative chain of one channel."""
    x = np.asarray(x, dtype=float)
    _check_length(len(x))
    return KinematicDerivatives(x, *_derivatives(x))


def _ratio(num, den):
    safe = np.where(den == 0, 1.0, den)
    return np.where(den == 0, 0.0, num / safe)


def _rms(z):
    return np.sqrt(np.mean(z * z, axis=1))


def _local_maxima(x):
    """Mask of local maxima; a plateau counts once, at its first index.

    A maximum needs a strictly lower run on both sides, so edges never count.
    """
    rows, width = x.shape
    index = np.broadcast_to(np.arange(width), x.shape)
    is_start = np.ones(x.shape, dtype=bool)
    is_start[:, 1:] = x[:, 1:] != x[:, :-1]
    start_or_end = np.where(is_start, index, width)
    # first run start at or after each position
    following = np.minimum.accumulate(start_or_end[:, ::-1], axis=1)[:, ::-1]
    next_start = np.full(x.shape, width)
    next_start[:, :-1] = following[:, 1:]
    has_next = next_start < width
    next_value = np.take_along_axis(x, np.minimum(next_start, width - 1), axis=1)
    previous = np.empty_like(x)
    previous[:, 0] = np.inf
    previous[:, 1:] = x[:, :-1]
    return is_start & (index > 0) & has_next & (x > previous) & (x > next_value)


def global_features_batch(x) -> np.ndarray:
    """Compute the 28 features for every row of an M x W matrix."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    rows, width = x.shape
    _check_length(width)
    v, a, a_t, a_c, j = _derivatives(x)
    out = np.zeros((rows, N_GLOBAL))

    pos = v > 0
    neg = v < 0
    abs_v_max = np.abs(v).max(axis=1)
    v_max = v.max(axis=1)
    abs_a_max = np.abs(a).max(axis=1)
    mean_v = v.mean(axis=1)
    x_range = x.max(axis=1) - x.min(axis=1)

    out[:, 0] = np.where(pos, v, 0.0).sum(axis=1)
    out[:, 1] = np.where(neg, v, 0.0).sum(axis=1)

    maxima = _local_maxima(x)
    score = np.where(maxima, x, -np.inf)
    # stable sort keeps the earlier index first among equal values
    order = np.argsort(-score, axis=1, kind='stable')[:, :3]
    top = np.take_along_axis(score, order, axis=1)
    out[:, 2:5] = np.where(np.isfinite(top), order / (width - 1), 0.0)

    out[:, 5] = _ratio(mean_v, abs_v_max)
    out[:, 6] = _ratio(mean_v, v_max)
    out[:, 7] = _ratio(_rms(v), abs_v_max)
    out[:, 8] = _ratio(_rms(a_c), abs_a_max)
    out[:, 9] = _ratio(_rms(a_t), abs_a_max)
    out[:, 10] = _ratio(_rms(a), abs_a_max)
    out[:, 11] = _ratio(np.abs(a_c).mean(axis=1), abs_a_max)
    out[:, 12] = v.std(axis=1)
    out[:, 13] = a.std(axis=1)
    out[:, 14] = np.abs(j).mean(axis=1)
    out[:, 15] = j.mean(axis=1)
    out[:, 16] = np.abs(j).max(axis=1)
    out[:, 17] = j.max(axis=1)
    out[:, 18] = _rms(j)
    out[:, 19] = np.argmax(np.abs(j), axis=1) / j.shape[1]
    out[:, 20] = np.argmax(j, axis=1) / j.shape[1]

    signs = np.sign(v)
    last_nonzero = np.maximum.accumulate(np.where(signs != 0, np.arange(v.shape[1]), 0), axis=1)
    filled = np.take_along_axis(signs, last_nonzero, axis=1)
    changes = (filled[:, 1:] != filled[:, :-1]) & (filled[:, 1:] != 0) & (filled[:, :-1] != 0)
    out[:, 21] = changes.sum(axis=1)

    out[:, 22] = _ratio(np.where(pos, v, 0.0).sum(axis=1), -np.where(neg, v, 0.0).sum(axis=1))
    out[:, 23] = _ratio(pos.sum(axis=1).astype(float), neg.sum(axis=1).astype(float))
    out[:, 24] = x_range
    out[:, 25] = _ratio(mean_v, x_range)
    out[:, 26] = maxima.sum(axis=1)
    out[:, 27] = np.abs(a).mean(axis=1)
    return out


def global_features(x) -> np.ndarray:
    """Compute the 28 features of one channel."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError('expected a single channel, got shape {0}'.format(x.shape))
    return global_features_batch(x[None, :])[0]


def global_vector(local) -> np.ndarray:
    """Map an N x W local vector to its N x 28 global vector."""
    local = np.asarray(local, dtype=float)
    if local.ndim != 2:
        raise ValueError('expected an N x W matrix, got shape {0}'.format(local.shape))
    return global_features_batch(local)
